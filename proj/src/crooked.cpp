#include "pseudocircle/crooked.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace pseudocircle {

PiecewiseMonotone::PiecewiseMonotone(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() < 2 || x_.size() != y_.size())
    throw PreconditionError("PiecewiseMonotone: need at least two matching breakpoints");
  for (std::size_t k = 1; k < x_.size(); ++k)
    if (!(x_[k] > x_[k - 1])) throw PreconditionError("PiecewiseMonotone: breakpoints must increase strictly");
}

double PiecewiseMonotone::operator()(double t) const {
  if (t <= x_.front()) return y_.front();
  if (t >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - x_.begin());
  const double w = (t - x_[k - 1]) / (x_[k] - x_[k - 1]);
  return y_[k - 1] + w * (y_[k] - y_[k - 1]);
}

PiecewiseMonotone PiecewiseMonotone::restricted(double a, double b) const {
  if (!(a < b) || a < x_.front() || b > x_.back())
    throw PreconditionError("PiecewiseMonotone::restricted: [a, b] must be a sub-interval of the domain");
  std::vector<double> xs{a}, ys{(*this)(a)};
  for (std::size_t k = 0; k < x_.size(); ++k) {
    if (x_[k] > a && x_[k] < b) {
      xs.push_back(x_[k]);
      ys.push_back(y_[k]);
    }
  }
  xs.push_back(b);
  ys.push_back((*this)(b));
  return PiecewiseMonotone(std::move(xs), std::move(ys));
}

PiecewiseMonotone PiecewiseMonotone::extrema() const {
  std::vector<double> xs{x_.front()}, ys{y_.front()};
  int dir = 0;
  for (std::size_t k = 1; k < x_.size(); ++k) {
    const double dy = y_[k] - y_[k - 1];
    const int s = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    if (s != 0 && dir != 0 && s != dir) {
      xs.push_back(x_[k - 1]);
      ys.push_back(y_[k - 1]);
    }
    if (s != 0) dir = s;
  }
  if (xs.back() != x_.back()) {
    xs.push_back(x_.back());
    ys.push_back(y_.back());
  }
  return PiecewiseMonotone(std::move(xs), std::move(ys));
}

double PiecewiseMonotone::min_value() const { return *std::min_element(y_.begin(), y_.end()); }
double PiecewiseMonotone::max_value() const { return *std::max_element(y_.begin(), y_.end()); }

double PiecewiseMonotone::lipschitz() const {
  double l = 0.0;
  for (std::size_t k = 1; k < x_.size(); ++k) l = std::max(l, std::abs(y_[k] - y_[k - 1]) / (x_[k] - x_[k - 1]));
  return l;
}

namespace {

// Spans met by the recursion are span - k eps/2, so the count is memoised on k.
double segments_memo(double eps, double span, int k, std::map<int, double>& memo) {
  const double s = span - k * eps / 2;
  if (s <= 1e-12 * eps) return 0.0;
  if (s < eps) return 1.0;
  if (auto it = memo.find(k); it != memo.end()) return it->second;
  const double v = 2 * segments_memo(eps, span, k + 1, memo) + segments_memo(eps, span, k + 2, memo);
  memo[k] = v;
  return v;
}

void crook(double eps, double y0, double y1, std::vector<double>& ys) {
  const double span = std::abs(y1 - y0);
  if (span <= 1e-12 * eps) return;
  if (span < eps) {
    ys.push_back(y1);
    return;
  }
  const double s = y1 > y0 ? 1.0 : -1.0;
  const double near_top = y1 - s * eps / 2;
  const double near_bottom = y0 + s * eps / 2;
  crook(eps, y0, near_top, ys);
  crook(eps, near_top, near_bottom, ys);
  crook(eps, near_bottom, y1, ys);
}

}  // namespace

double zigzag_segments(double eps, double span) {
  if (!(eps > 0)) throw PreconditionError("zigzag_segments: eps must be positive");
  std::map<int, double> memo;
  return segments_memo(eps, std::abs(span), 0, memo);
}

PiecewiseMonotone build_zigzag(double eps, double a, double b, double y0, double y1, double budget) {
  if (!(eps > 0) || !(a < b) || y0 == y1) throw PreconditionError("build_zigzag: need eps > 0, a < b, y0 != y1");
  const double span = std::abs(y1 - y0);
  const double need = zigzag_segments(eps, span) + 1;
  if (need > budget) {
    double lo = eps, hi = span;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (zigzag_segments(mid, span) + 1 > budget ? lo : hi) = mid;
    }
    std::ostringstream msg;
    msg << "build_zigzag: span " << span << " at eps " << eps << " needs " << need
        << " breakpoints (budget " << budget << "); smallest admissible eps is about " << hi;
    throw BudgetError("zigzag", msg.str());
  }
  std::vector<double> ys{y0};
  ys.reserve(static_cast<std::size_t>(need));
  crook(eps, y0, y1, ys);
  std::vector<double> xs(ys.size());
  double total = 0.0;
  for (std::size_t k = 1; k < ys.size(); ++k) total += std::abs(ys[k] - ys[k - 1]);
  double run = 0.0;
  xs[0] = a;
  for (std::size_t k = 1; k < ys.size(); ++k) {
    run += std::abs(ys[k] - ys[k - 1]);
    xs[k] = a + (b - a) * (run / total);
  }
  xs.back() = b;
  ys.back() = y1;
  return PiecewiseMonotone(std::move(xs), std::move(ys));
}

namespace {

double crossing(double x0, double y0, double x1, double y1, double level) {
  if (y1 == y0) return x0;
  return x0 + (x1 - x0) * ((level - y0) / (y1 - y0));
}

// One pass at a fixed eps over the extrema windows of g.
CrookedCertificate scan(const PiecewiseMonotone& g, double eps) {
  const auto& x = g.x();
  const auto& y = g.y();
  const std::size_t n = g.size();
  CrookedCertificate cert;
  cert.eps = eps;
  cert.a0 = g.lo();
  cert.b0 = g.hi();
  std::vector<double> pmin(n), pmax(n), last_near(n);
  for (std::size_t ia = 0; ia + 1 < n; ++ia) {
    const double fa = y[ia];
    pmin[ia] = pmax[ia] = fa;
    last_near[ia] = x[ia];
    for (std::size_t k = ia + 1; k < n; ++k) {
      pmin[k] = std::min(pmin[k - 1], y[k]);
      pmax[k] = std::max(pmax[k - 1], y[k]);
      if (std::abs(y[k] - fa) <= eps) {
        last_near[k] = x[k];
      } else {
        const double level = y[k] > fa ? fa + eps : fa - eps;
        const bool meets = std::min(y[k - 1], y[k]) <= level && std::max(y[k - 1], y[k]) >= level;
        last_near[k] = meets ? crossing(x[k - 1], y[k - 1], x[k], y[k], level) : last_near[k - 1];
      }
    }
    for (std::size_t ib = n - 1; ib > ia; --ib) {
      ++cert.windows;
      const double fb = y[ib];
      if (std::abs(fb - fa) <= eps) continue;
      std::size_t k = ia + 1;
      double t1;
      if (fb > fa) {
        const double level = fb - eps;
        k = static_cast<std::size_t>(std::lower_bound(pmax.begin() + static_cast<long>(ia) + 1,
                                                      pmax.begin() + static_cast<long>(ib) + 1, level) -
                                     pmax.begin());
        t1 = crossing(x[k - 1], y[k - 1], x[k], y[k], level);
      } else {
        const double level = fb + eps;
        k = static_cast<std::size_t>(std::lower_bound(pmin.begin() + static_cast<long>(ia) + 1,
                                                      pmin.begin() + static_cast<long>(ib) + 1, level,
                                                      [](double v, double l) { return v > l; }) -
                                     pmin.begin());
        t1 = crossing(x[k - 1], y[k - 1], x[k], y[k], level);
      }
      if (!(t1 < last_near[ib])) {
        cert.failure = std::make_pair(x[ia], x[ib]);
        return cert;
      }
    }
  }
  cert.verified = true;
  return cert;
}

}  // namespace

CrookedCertificate is_eps_crooked(const PiecewiseMonotone& f, double eps, double a0, double b0, bool with_margin) {
  if (!(eps > 0)) throw PreconditionError("is_eps_crooked: eps must be positive");
  const auto g = f.restricted(a0, b0).extrema();
  auto cert = scan(g, eps);
  cert.a0 = a0;
  cert.b0 = b0;
  if (!with_margin) return cert;
  const double span = g.max_value() - g.min_value();
  double lo = 0.0, hi = eps;
  if (!cert.verified) {
    lo = eps;
    hi = std::max(eps, span) * (1 + 1e-12) + 1e-300;
  }
  const double tol = eps * 1e-3;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (scan(g, mid).verified ? hi : lo) = mid;
  }
  cert.margin = eps - hi;
  return cert;
}

CrookedCertificate is_eps_crooked(const PiecewiseMonotone& f, double eps, bool with_margin) {
  return is_eps_crooked(f, eps, f.lo(), f.hi(), with_margin);
}

nlohmann::json to_json(const PiecewiseMonotone& f) { return {{"x", f.x()}, {"y", f.y()}}; }

PiecewiseMonotone piecewise_from_json(const nlohmann::json& j) {
  return PiecewiseMonotone(j.at("x").get<std::vector<double>>(), j.at("y").get<std::vector<double>>());
}

nlohmann::json to_json(const CrookedCertificate& c) {
  nlohmann::json out{{"eps", c.eps},           {"interval", {c.a0, c.b0}}, {"verified", c.verified},
                     {"margin", c.margin},     {"windows", c.windows}};
  out["failure"] = c.failure ? nlohmann::json::array({c.failure->first, c.failure->second}) : nlohmann::json(nullptr);
  return out;
}

CrookedCertificate certificate_from_json(const nlohmann::json& j) {
  CrookedCertificate c;
  c.eps = j.at("eps").get<double>();
  c.a0 = j.at("interval").at(0).get<double>();
  c.b0 = j.at("interval").at(1).get<double>();
  c.verified = j.at("verified").get<bool>();
  c.margin = j.at("margin").get<double>();
  c.windows = j.value("windows", std::size_t{0});
  if (!j.at("failure").is_null()) c.failure = std::make_pair(j["failure"][0].get<double>(), j["failure"][1].get<double>());
  return c;
}

}  // namespace pseudocircle
