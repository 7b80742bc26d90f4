#include "pseudocircle/chain.hpp"

#include <algorithm>
#include <limits>

namespace pseudocircle {

CircleInterval CircleInterval::make(double lo, double hi) {
  if (!(lo < hi)) throw PreconditionError("CircleInterval: lo must be < hi");
  if (!(hi - lo < 1.0)) throw PreconditionError("CircleInterval: length must be < 1");
  return {lo, hi};
}

CircleInterval CircleInterval::normalized() const {
  const double s = std::floor(lo);
  return {lo - s, hi - s};
}

bool operator==(const CircleInterval& a, const CircleInterval& b) { return a.lo == b.lo && a.hi == b.hi; }

bool intersects_on_circle(const CircleInterval& a, const CircleInterval& b) {
  const long first = static_cast<long>(std::ceil(a.lo - b.hi));
  const long last = static_cast<long>(std::floor(a.hi - b.lo));
  for (long t = first; t <= last; ++t)
    if (overlap_length(a, b.shifted(static_cast<double>(t))) > kChainTol) return true;
  return false;
}

CircleChain standard_chain(long n) {
  if (n < 4) throw PreconditionError("standard_chain: N must be >= 4");
  std::vector<IntervalCell> cells;
  cells.reserve(static_cast<std::size_t>(n));
  const double dn = static_cast<double>(n);
  for (long i = 0; i < n; ++i) {
    const double di = static_cast<double>(i);
    cells.push_back(IntervalCell{{CircleInterval{(di - 1.25) / dn, (di + 0.25) / dn}}});
  }
  return CircleChain(std::move(cells));
}

TorusChain strip_chain(double x, double eps, long n) {
  if (!(eps > 0.0) || !(eps < 0.5)) throw PreconditionError("strip_chain: eps must lie in (0, 1/2)");
  const auto base = standard_chain(n);
  std::vector<RectCell> cells;
  cells.reserve(base.size());
  for (const auto& c : base.elements()) cells.push_back(RectCell{{CircleInterval{x - eps, x + eps}, c.side[0]}});
  return TorusChain(std::move(cells));
}

ChainMap::ChainMap(std::vector<long> lhat, long outer_size) : lhat_(std::move(lhat)), outer_(outer_size) {
  if (lhat_.empty() || outer_ <= 0) throw PreconditionError("ChainMap: empty map");
}

long ChainMap::lhat(long i) const {
  const long n = inner_size();
  long q = i / n;
  long r = i % n;
  if (r < 0) {
    r += n;
    --q;
  }
  return lhat_[static_cast<std::size_t>(r)] + q * outer_;
}

long ChainMap::ell(long i) const {
  long r = lhat(i) % outer_;
  return r < 0 ? r + outer_ : r;
}

CrookedVerdict is_crooked_inside(const ChainMap& map, std::size_t max_witnesses) {
  const long np = map.inner_size();
  const long n_out = map.outer_size();
  // Extended sequence over two periods covers every window i < j < i + N'.
  std::vector<long> seq(static_cast<std::size_t>(2 * np));
  for (long k = 0; k < 2 * np; ++k) seq[static_cast<std::size_t>(k)] = map.lhat(k);
  const long vmin = *std::min_element(seq.begin(), seq.end()) - 2;
  const long vmax = *std::max_element(seq.begin(), seq.end()) + 2;
  std::vector<long> first_hit(static_cast<std::size_t>(vmax - vmin + 1), -1);
  std::vector<long> touched;

  CrookedVerdict verdict;
  auto at = [&](long k) { return seq[static_cast<std::size_t>(k)]; };
  for (long i = 0; i < np; ++i) {
    for (long t : touched) first_hit[static_cast<std::size_t>(t - vmin)] = -1;
    touched.clear();
    const long li = at(i);
    long imin = std::numeric_limits<long>::max();
    long imax = std::numeric_limits<long>::min();
    long last_near_i = -1;
    for (long j = i + 1; j < i + np; ++j) {
      if (j - 1 > i) {
        const long k = j - 1;
        const long lk = at(k);
        imin = std::min(imin, lk);
        imax = std::max(imax, lk);
        auto& slot = first_hit[static_cast<std::size_t>(lk - vmin)];
        if (slot < 0) {
          slot = k;
          touched.push_back(lk);
        }
        if (std::abs(lk - li) <= 1) last_near_i = k;
      }
      // Interior values on both sides of lhat(i): no later j can be admissible.
      if (imin < li && imax > li) break;
      const long lj = at(j);
      const bool has_interior = j - 1 > i;
      const bool admissible = !has_interior || (imin >= std::min(li, lj) && imax <= std::max(li, lj));
      const long span = std::abs(lj - li);
      if (!admissible || span <= 4 || span >= n_out) continue;
      ++verdict.windows_checked;
      long u = -1;
      for (long w = lj - 1; w <= lj + 1; ++w) {
        const long h = first_hit[static_cast<std::size_t>(w - vmin)];
        if (h >= 0 && (u < 0 || h < u)) u = h;
      }
      if (u < 0 || last_near_i < 0 || !(u < last_near_i)) {
        verdict.crooked = false;
        verdict.counterexample = std::make_pair(i, j);
        return verdict;
      }
      if (verdict.witnesses.size() < max_witnesses) verdict.witnesses.push_back({i, j, u, last_near_i});
    }
  }
  return verdict;
}

namespace {

nlohmann::json interval_json(const CircleInterval& iv) { return nlohmann::json::array({iv.lo, iv.hi}); }

CircleInterval interval_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw IoError("chain json: interval must be [lo, hi]");
  return CircleInterval::make(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

nlohmann::json to_json(const CircleChain& chain) {
  nlohmann::json out;
  out["n"] = chain.size();
  auto& el = out["elements"] = nlohmann::json::array();
  for (const auto& c : chain.elements()) el.push_back(interval_json(c.side[0]));
  try {
    out["homotopy"] = lift_chain(chain).homotopy()[0];
  } catch (const std::exception&) {
    out["homotopy"] = nullptr;
  }
  return out;
}

nlohmann::json to_json(const TorusChain& chain) {
  nlohmann::json out;
  out["n"] = chain.size();
  auto& el = out["elements"] = nlohmann::json::array();
  for (const auto& c : chain.elements())
    el.push_back(nlohmann::json::array({interval_json(c.side[0]), interval_json(c.side[1])}));
  try {
    const auto v = lift_chain(chain).homotopy();
    out["homotopy"] = nlohmann::json::array({v[0], v[1]});
  } catch (const std::exception&) {
    out["homotopy"] = nullptr;
  }
  return out;
}

CircleChain circle_chain_from_json(const nlohmann::json& j) {
  std::vector<IntervalCell> cells;
  for (const auto& e : j.at("elements")) cells.push_back(IntervalCell{{interval_from(e)}});
  if (cells.size() != j.at("n").get<std::size_t>()) throw IoError("chain json: n does not match element count");
  return CircleChain(std::move(cells));
}

TorusChain torus_chain_from_json(const nlohmann::json& j) {
  std::vector<RectCell> cells;
  for (const auto& e : j.at("elements")) {
    if (!e.is_array() || e.size() != 2) throw IoError("chain json: rectangle must be [[xlo,xhi],[ylo,yhi]]");
    cells.push_back(RectCell{{interval_from(e[0]), interval_from(e[1])}});
  }
  if (cells.size() != j.at("n").get<std::size_t>()) throw IoError("chain json: n does not match element count");
  return TorusChain(std::move(cells));
}

}  // namespace pseudocircle
