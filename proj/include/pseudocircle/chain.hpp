#pragma once

// Circular chains of intervals (on T^1) and product rectangles (on T^2),
// their lifts to the universal cover, chain maps between them, and the
// combinatorial "crooked inside" test.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pseudocircle/errors.hpp"

namespace pseudocircle {

/// Slack used for every overlap and containment test on lifted coordinates.
inline constexpr double kChainTol = 1e-12;

/// Open interval (lo, hi) of R, read on T^1 = R/Z. Requires lo < hi and hi - lo < 1.
struct CircleInterval {
  double lo = 0.0;
  double hi = 0.0;

  static CircleInterval make(double lo, double hi);

  double length() const { return hi - lo; }
  CircleInterval shifted(double s) const { return {lo + s, hi + s}; }
  /// Same interval with lo moved into [0, 1).
  CircleInterval normalized() const;
};

bool operator==(const CircleInterval& a, const CircleInterval& b);

/// Overlap length of two lifted intervals (negative when they are apart).
inline double overlap_length(const CircleInterval& a, const CircleInterval& b) {
  return std::min(a.hi, b.hi) - std::max(a.lo, b.lo);
}

/// True when (a) and some integer translate of (b) intersect.
bool intersects_on_circle(const CircleInterval& a, const CircleInterval& b);

/// D-fold product of intervals. Box<1> is a circle interval, Box<2> an open
/// rectangle of the torus given as (horizontal, vertical).
template <std::size_t D>
struct Box {
  std::array<CircleInterval, D> side{};

  using Shift = std::array<long, D>;

  Box translated(const Shift& s) const {
    Box out = *this;
    for (std::size_t d = 0; d < D; ++d) out.side[d] = side[d].shifted(static_cast<double>(s[d]));
    return out;
  }
  double diameter() const {
    double acc = 0.0;
    for (const auto& iv : side) acc += iv.length() * iv.length();
    return std::sqrt(acc);
  }
  Box normalized() const {
    Box out = *this;
    for (auto& iv : out.side) iv = iv.normalized();
    return out;
  }
  friend bool operator==(const Box& a, const Box& b) { return a.side == b.side; }
};

using IntervalCell = Box<1>;
using RectCell = Box<2>;

template <std::size_t D>
bool lifted_intersect(const Box<D>& a, const Box<D>& b) {
  for (std::size_t d = 0; d < D; ++d)
    if (overlap_length(a.side[d], b.side[d]) <= kChainTol) return false;
  return true;
}

/// inner is contained in outer, with kChainTol slack on each side.
template <std::size_t D>
bool lifted_contains(const Box<D>& outer, const Box<D>& inner) {
  for (std::size_t d = 0; d < D; ++d) {
    if (inner.side[d].lo < outer.side[d].lo - kChainTol) return false;
    if (inner.side[d].hi > outer.side[d].hi + kChainTol) return false;
  }
  return true;
}

template <std::size_t D>
bool torus_intersect(const Box<D>& a, const Box<D>& b) {
  for (std::size_t d = 0; d < D; ++d)
    if (!intersects_on_circle(a.side[d], b.side[d])) return false;
  return true;
}

/// Family of cells indexed by Z/NZ.
template <std::size_t D>
class CircularChain {
 public:
  using Cell = Box<D>;

  CircularChain() = default;
  explicit CircularChain(std::vector<Cell> elements) : elements_(std::move(elements)) {}

  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }
  const Cell& operator[](std::size_t k) const { return elements_[k]; }
  const std::vector<Cell>& elements() const { return elements_; }
  double max_diameter() const {
    double m = 0.0;
    for (const auto& c : elements_) m = std::max(m, c.diameter());
    return m;
  }

 private:
  std::vector<Cell> elements_;
};

using CircleChain = CircularChain<1>;
using TorusChain = CircularChain<2>;

/// B(N): the intervals ((i - 5/4)/N, (i + 1/4)/N), i in Z/NZ. Requires N >= 4.
CircleChain standard_chain(long n);

/// Torus chain {(x - eps, x + eps) x B_i : B_i in B(N)}.
TorusChain strip_chain(double x, double eps, long n);

struct ChainCheck {
  bool ok = true;
  std::optional<std::pair<std::size_t, std::size_t>> violation;
};

/// Checks that element k meets element l iff k - l in {-1, 0, 1} mod N.
/// Reports the lexicographically first violating (k, l), k < l.
template <std::size_t D>
ChainCheck is_circular_chain(const CircularChain<D>& chain) {
  if (chain.empty()) throw PreconditionError("is_circular_chain: empty chain");
  const std::size_t n = chain.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) {
      const std::size_t gap = l - k;
      const bool adjacent = gap <= 1 || gap == n - 1;
      if (torus_intersect(chain[k], chain[l]) != adjacent) return {false, std::make_pair(k, l)};
    }
  }
  return {};
}

/// A lift of a circular chain: lifted elements 0..N-1 plus the homotopy type v,
/// with element k + N equal to element k translated by v.
template <std::size_t D>
class ChainLift {
 public:
  using Cell = Box<D>;
  using Shift = typename Cell::Shift;

  ChainLift(std::vector<Cell> lifted, Shift v) : lifted_(std::move(lifted)), v_(v) {
    if (lifted_.empty()) throw PreconditionError("ChainLift: empty");
  }

  long size() const { return static_cast<long>(lifted_.size()); }
  const Shift& homotopy() const { return v_; }

  /// Lifted element for any integer index.
  Cell element(long k) const {
    const long n = size();
    long q = k / n;
    long r = k % n;
    if (r < 0) {
      r += n;
      --q;
    }
    Shift s{};
    for (std::size_t d = 0; d < D; ++d) s[d] = q * v_[d];
    return lifted_[static_cast<std::size_t>(r)].translated(s);
  }

  /// Base chain with each element normalized mod 1.
  CircularChain<D> project() const {
    std::vector<Cell> out;
    out.reserve(lifted_.size());
    for (const auto& c : lifted_) out.push_back(c.normalized());
    return CircularChain<D>(std::move(out));
  }

  ChainLift translated(const Shift& w) const {
    std::vector<Cell> out;
    out.reserve(lifted_.size());
    for (const auto& c : lifted_) out.push_back(c.translated(w));
    return ChainLift(std::move(out), v_);
  }

 private:
  std::vector<Cell> lifted_;
  Shift v_;
};

namespace detail {

inline bool congruent_mod1(const CircleInterval& a, const CircleInterval& b, double tol = 1e-9) {
  const double s = std::round(a.lo - b.lo);
  return std::abs(a.lo - b.lo - s) <= tol && std::abs(a.hi - b.hi - s) <= tol;
}

/// The unique integer translate of `cell` meeting `anchor`, or nullopt when
/// there is none or more than one.
template <std::size_t D>
std::optional<typename Box<D>::Shift> unique_meeting_shift(const Box<D>& anchor, const Box<D>& cell) {
  typename Box<D>::Shift s{};
  for (std::size_t d = 0; d < D; ++d) {
    const auto& a = anchor.side[d];
    const auto& c = cell.side[d];
    const long first = static_cast<long>(std::ceil(a.lo - c.hi));
    const long last = static_cast<long>(std::floor(a.hi - c.lo));
    int hits = 0;
    for (long t = first; t <= last; ++t) {
      if (overlap_length(a, c.shifted(static_cast<double>(t))) > kChainTol) {
        s[d] = t;
        ++hits;
      }
    }
    if (hits != 1) return std::nullopt;
  }
  return s;
}

}  // namespace detail

/// Lifts `chain` starting from `anchor` (a lift of element 0). Requires every
/// element to have diameter < 1/4. Throws ChainError when no consistent lift
/// exists or the lifted chain is contractible.
template <std::size_t D>
ChainLift<D> lift_chain(const CircularChain<D>& chain, const Box<D>& anchor) {
  if (chain.empty()) throw PreconditionError("lift_chain: empty chain");
  for (std::size_t d = 0; d < D; ++d)
    if (!detail::congruent_mod1(anchor.side[d], chain[0].side[d]))
      throw PreconditionError("lift_chain: anchor is not a lift of element 0");
  for (std::size_t k = 0; k < chain.size(); ++k)
    if (!(chain[k].diameter() < 0.25))
      throw PreconditionError("lift_chain: element " + std::to_string(k) + " has diameter >= 1/4");

  const std::size_t n = chain.size();
  std::vector<Box<D>> lifted;
  lifted.reserve(n);
  lifted.push_back(anchor);
  Box<D> prev = anchor;
  for (std::size_t k = 1; k <= n; ++k) {
    const Box<D>& base = chain[k % n];
    auto s = detail::unique_meeting_shift(prev, base);
    if (!s) throw ChainError("lift_chain: element " + std::to_string(k % n) + " has no unique lift next to element " +
                             std::to_string(k - 1));
    prev = base.translated(*s);
    if (k < n) lifted.push_back(prev);
  }
  typename Box<D>::Shift v{};
  bool zero = true;
  for (std::size_t d = 0; d < D; ++d) {
    v[d] = std::lround(prev.side[d].lo - anchor.side[d].lo);
    zero = zero && v[d] == 0;
  }
  if (zero) throw ChainError("lift_chain: chain is homotopically trivial");

  ChainLift<D> lift(std::move(lifted), v);
  // Lifted elements k and l meet iff |k - l| <= 1 over one period and its neighbours.
  const long nn = static_cast<long>(n);
  for (long k = 0; k < nn; ++k) {
    const auto ck = lift.element(k);
    for (long l = k + 2; l <= k + nn; ++l) {
      if (lifted_intersect(ck, lift.element(l)))
        throw ChainError("lift_chain: lifted elements " + std::to_string(k) + " and " + std::to_string(l) + " meet");
    }
  }
  return lift;
}

template <std::size_t D>
ChainLift<D> lift_chain(const CircularChain<D>& chain) {
  if (chain.empty()) throw PreconditionError("lift_chain: empty chain");
  return lift_chain(chain, chain[0]);
}

/// l: Z/N'Z -> Z/NZ together with its lift lhat; lhat(i + N') = lhat(i) + N.
class ChainMap {
 public:
  ChainMap(std::vector<long> lhat, long outer_size);

  long inner_size() const { return static_cast<long>(lhat_.size()); }
  long outer_size() const { return outer_; }
  /// Lifted index for any integer i.
  long lhat(long i) const;
  /// Reduced index in [0, N).
  long ell(long i) const;
  const std::vector<long>& lhat_period() const { return lhat_; }

 private:
  std::vector<long> lhat_;
  long outer_;
};

/// Builds the chain map between two lifted chains. The inner lift may be
/// re-anchored by an integer translation orthogonal to the homotopy type.
/// Ties go to the smallest lifted outer index.
template <std::size_t D>
ChainMap chain_map(const ChainLift<D>& inner_in, const ChainLift<D>& outer) {
  if (inner_in.homotopy() != outer.homotopy()) throw ChainError("chain_map: homotopy types differ");
  const auto& v = outer.homotopy();
  const long n_out = outer.size();
  const long n_in = inner_in.size();

  // Locate inner element 0 among all translates of the outer elements.
  const auto first = inner_in.element(0);
  std::optional<long> best_j;
  typename Box<D>::Shift best_w{};
  long vv = 0;
  for (std::size_t d = 0; d < D; ++d) vv += v[d] * v[d];
  for (long k = 0; k < n_out; ++k) {
    const auto base = outer.element(k);
    std::array<long, D> centre{};
    for (std::size_t d = 0; d < D; ++d) centre[d] = std::lround(first.side[d].lo - base.side[d].lo);
    // Enumerate shifts within +-1 of the rounded offset in every dimension.
    std::size_t combos = 1;
    for (std::size_t d = 0; d < D; ++d) combos *= 3;
    for (std::size_t c = 0; c < combos; ++c) {
      typename Box<D>::Shift s{};
      std::size_t code = c;
      for (std::size_t d = 0; d < D; ++d) {
        s[d] = centre[d] + static_cast<long>(code % 3) - 1;
        code /= 3;
      }
      if (!lifted_contains(base.translated(s), first)) continue;
      long dot = 0;
      for (std::size_t d = 0; d < D; ++d) dot += s[d] * v[d];
      if (dot % vv != 0) continue;
      const long t = dot / vv;
      typename Box<D>::Shift w{};
      for (std::size_t d = 0; d < D; ++d) w[d] = s[d] - t * v[d];
      const long j = k + t * n_out;
      if (!best_j || j < *best_j) {
        best_j = j;
        best_w = w;
      }
    }
  }
  if (!best_j) throw ChainError("chain_map: inner element 0 is contained in no outer element");
  typename Box<D>::Shift back{};
  for (std::size_t d = 0; d < D; ++d) back[d] = -best_w[d];
  const ChainLift<D> inner = inner_in.translated(back);

  std::vector<long> lhat(static_cast<std::size_t>(n_in));
  lhat[0] = *best_j;
  for (long i = 1; i < n_in; ++i) {
    const auto cell = inner.element(i);
    const long prev = lhat[static_cast<std::size_t>(i - 1)];
    std::optional<long> found;
    for (long j = prev - 1; j <= prev + 1; ++j) {
      if (lifted_contains(outer.element(j), cell)) {
        found = j;
        break;
      }
    }
    if (!found) throw ChainError("chain_map: inner element " + std::to_string(i) + " is contained in no outer element");
    lhat[static_cast<std::size_t>(i)] = *found;
  }
  if (std::abs(lhat.back() - (lhat.front() + n_out)) > 1)
    throw ChainError("chain_map: lifted map does not close up with period N");
  return ChainMap(std::move(lhat), n_out);
}

template <std::size_t D>
ChainMap chain_map(const CircularChain<D>& inner, const CircularChain<D>& outer) {
  return chain_map(lift_chain(inner), lift_chain(outer));
}

/// Window (i, j) and the indices u < v found inside it.
struct CrookWitness {
  long i = 0, j = 0, u = 0, v = 0;
};

struct CrookedVerdict {
  bool crooked = true;
  std::optional<std::pair<long, long>> counterexample;
  std::vector<CrookWitness> witnesses;  // first few satisfied windows
  std::size_t windows_checked = 0;
};

/// Crookedness of the inner chain inside the outer one, decided on lhat alone:
/// every window i < j < i + N' whose interior values stay between lhat(i) and
/// lhat(j), with 4 < |lhat(j) - lhat(i)| < N, must contain i < u < v < j with
/// |lhat(u) - lhat(j)| <= 1 and |lhat(v) - lhat(i)| <= 1.
CrookedVerdict is_crooked_inside(const ChainMap& map, std::size_t max_witnesses = 16);

nlohmann::json to_json(const CircleChain& chain);
nlohmann::json to_json(const TorusChain& chain);
CircleChain circle_chain_from_json(const nlohmann::json& j);
TorusChain torus_chain_from_json(const nlohmann::json& j);

}  // namespace pseudocircle
