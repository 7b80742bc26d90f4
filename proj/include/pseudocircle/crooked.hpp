#pragma once

// Piecewise-linear crook prototypes, the eps-crookedness decision procedure,
// and the degree-one trigonometric circle maps theta built from them.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pseudocircle/errors.hpp"

namespace pseudocircle {

inline constexpr double kZigzagBudget = 1e7;

/// Continuous piecewise-linear function through (x[k], y[k]), x strictly increasing.
class PiecewiseMonotone {
 public:
  PiecewiseMonotone() = default;
  PiecewiseMonotone(std::vector<double> x, std::vector<double> y);

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }
  std::size_t size() const { return x_.size(); }
  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }

  /// Value at t; t outside [lo, hi] is clamped.
  double operator()(double t) const;
  /// Restriction to [a, b], with the end values interpolated.
  PiecewiseMonotone restricted(double a, double b) const;
  /// Same function with every monotone run collapsed to one segment.
  PiecewiseMonotone extrema() const;
  double min_value() const;
  double max_value() const;
  /// Largest absolute slope.
  double lipschitz() const;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

/// Number of segments build_zigzag produces for a value span S at eps.
double zigzag_segments(double eps, double span);

/// Recursive crook from (a, y0) to (b, y1): go within eps/2 of y1, come back
/// within eps/2 of y0, then go to y1, recursing until every span is < eps.
/// Throws BudgetError when more than `budget` breakpoints would be needed.
PiecewiseMonotone build_zigzag(double eps, double a, double b, double y0, double y1,
                               double budget = kZigzagBudget);

struct CrookedCertificate {
  double eps = 0.0;
  double a0 = 0.0;
  double b0 = 0.0;
  bool verified = false;
  /// eps minus the smallest tested eps' that still passes (lower bound on the slack).
  double margin = 0.0;
  std::optional<std::pair<double, double>> failure;
  std::size_t windows = 0;
};

/// Decides whether f is eps-crooked on [a0, b0]: every a < b has a < c < d < b
/// with |f(c) - f(b)| <= eps and |f(d) - f(a)| <= eps. Windows range over the
/// extrema of f. With `with_margin` the slack is located by bisection.
CrookedCertificate is_eps_crooked(const PiecewiseMonotone& f, double eps, double a0, double b0,
                                  bool with_margin = true);
CrookedCertificate is_eps_crooked(const PiecewiseMonotone& f, double eps, bool with_margin = true);

struct ThetaOptions {
  /// Smoothing tolerance as a fraction of eps.
  double delta_ratio = 0.1;
  /// The prototype zigzags are built at this fraction of eps.
  double proto_ratio = 1.0;
  long max_frequencies = 200000;
  long grid = 1L << 16;
  double zigzag_budget = kZigzagBudget;
};

/// theta(x) = x + P(frac(m x)) with P(u) = a_0 + sum_k a_k cos(2 pi k u) + b_k sin(2 pi k u).
/// Coefficient k sits at x-frequency k m.
struct CircleMapPoly {
  long m = 1;
  double eps = 0.0;
  double delta_f = 0.0;
  std::vector<double> cos;
  std::vector<double> sin;
  /// theta on [0, 1/m] through its certified extrema.
  PiecewiseMonotone skeleton;
  double skeleton_tol = 0.0;
  double sup_error = 0.0;
  CrookedCertificate rising;
  CrookedCertificate falling;

  long degree() const { return static_cast<long>(cos.size()) - 1; }
  std::vector<long> frequencies() const;
  /// Bounds on |theta'| and |theta''| from the coefficient sums.
  double lipschitz() const;
  double second_derivative_bound() const;
};

CircleMapPoly build_theta(double eps, long m, const ThetaOptions& opt = {});

/// Recomputes skeleton, skeleton_tol and both certificates from the coefficients.
/// Returns whether both halves certify.
bool certify_theta(CircleMapPoly& theta, long grid = 1L << 16);

/// Independent re-derivation of a persisted theta: sup distance to the rebuilt
/// prototype and a fresh certificate, compared against the recorded values.
struct ThetaReplay {
  double sup_error = 0.0;
  bool within_delta = false;
  bool certified = false;
  double rising_margin = 0.0;
  double falling_margin = 0.0;
  bool matches_record = false;
  bool ok() const { return within_delta && certified && matches_record; }
};
ThetaReplay replay_theta(const CircleMapPoly& theta, const ThetaOptions& opt = {});

/// P(u) for the 1-periodic part, u in [0, 1).
double eval_periodic(const CircleMapPoly& theta, double u);
double eval_theta(const CircleMapPoly& theta, double x);
std::vector<double> eval_theta_band(const CircleMapPoly& theta, const std::vector<double>& xs);

/// The skeleton-based certificate, restricted to [a0, b0] within [0, 1/m].
CrookedCertificate is_eps_crooked(const CircleMapPoly& theta, double eps, double a0, double b0,
                                  bool with_margin = true);

/// Tabulated P on a uniform grid with linear interpolation, for bulk evaluation.
class ThetaTable {
 public:
  explicit ThetaTable(const CircleMapPoly& theta, int log2_size = 20);
  double periodic(double u) const;
  double operator()(double x) const;
  /// Uniform bound on |table - exact| for theta.
  double error_bound() const { return error_; }
  long m() const { return m_; }

 private:
  long m_;
  std::vector<double> values_;
  double error_;
};

nlohmann::json to_json(const PiecewiseMonotone& f);
PiecewiseMonotone piecewise_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CrookedCertificate& c);
CrookedCertificate certificate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CircleMapPoly& theta);
CircleMapPoly theta_from_json(const nlohmann::json& j);

}  // namespace pseudocircle
