#pragma once

// Rotation vectors, the periodic linear flow, the shear maps h_{n+1} built
// from theta_n along that flow, and the lazily evaluated conjugacies H_n.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "pseudocircle/crooked.hpp"
#include "pseudocircle/errors.hpp"

namespace pseudocircle {

using Real = long double;
using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

/// Point of R^2; as a torus point the coordinates are read mod 1.
struct Point {
  Real x = 0;
  Real y = 0;
};

inline Real frac(Real v) { return v - std::floor(v); }
inline Point wrap(Point z) { return {frac(z.x), frac(z.y)}; }
/// Distance on R/Z.
inline Real circle_dist(Real a, Real b) {
  const Real d = frac(a - b);
  return d > 0.5L ? 1.0L - d : d;
}
/// Euclidean distance on R^2/Z^2.
Real torus_dist(Point a, Point b);

/// value in [0, 1) given as num/den, 0 <= num < den, rounded to 64 bits.
Real unit_fraction(const BigInt& num, const BigInt& den);

/// alpha = (p/q, r/q) with 0 <= p, r < q and gcd(p, r, q) = 1.
class RotationVector {
 public:
  RotationVector() : p_(0), r_(0), q_(1) {}
  RotationVector(BigInt p, BigInt r, BigInt q);

  const BigInt& p() const { return p_; }
  const BigInt& r() const { return r_; }
  const BigInt& q() const { return q_; }
  BigRational x() const { return BigRational(p_, q_); }
  BigRational y() const { return BigRational(r_, q_); }
  /// i * alpha reduced mod 1, exactly, then rounded.
  Point multiple(const BigInt& i) const;
  Point as_point() const { return multiple(1); }
  std::string str() const;

  friend bool operator==(const RotationVector& a, const RotationVector& b) {
    return a.p_ == b.p_ && a.r_ == b.r_ && a.q_ == b.q_;
  }

 private:
  BigInt p_, r_, q_;
};

nlohmann::json to_json(const RotationVector& a);
RotationVector rotation_from_json(const nlohmann::json& j);

/// Period of the first-return rotation r/p of the flow on a vertical circle.
long return_period(const RotationVector& alpha);

/// phi(t, z) = z + t (p/q, r/q + p b), on the lift (no reduction).
Point flow_lift(const RotationVector& alpha, long b, Real t, Point z);
inline Point flow(const RotationVector& alpha, long b, Real t, Point z) { return wrap(flow_lift(alpha, b, t, z)); }

/// frac(L x) for an integer L, computed without rounding the product.
Real frac_product(const BigInt& L, Real x);

/// h_{n+1} and its inverse for the data (alpha_n, b_{n+1}, theta_n).
/// Theta is read from a table of 2^table_log2 samples; table_log2 = 0 sums
/// the trigonometric series at every call instead.
class ShearMap {
 public:
  ShearMap(RotationVector alpha, long b, std::shared_ptr<const CircleMapPoly> theta, int table_log2 = 20);

  const RotationVector& alpha() const { return alpha_; }
  long b() const { return b_; }
  long m() const { return m_; }
  const CircleMapPoly& theta() const { return *theta_; }
  const BigInt& slope_integer() const { return L_; }

  /// Theta_{n+1}(x, y) = theta(y0) - y0 where y0 = y - x (r/p + q b).
  Real Theta(Point z) const;
  /// Theta through the exact trigonometric sum instead of the table.
  Real Theta_exact(Point z) const;

  /// Lift maps; these commute with integer translations.
  Point forward_lift(Point z) const;
  Point inverse_lift(Point z) const;
  Point forward(Point z) const { return wrap(forward_lift(z)); }
  Point inverse(Point z) const { return wrap(inverse_lift(z)); }
  /// The same maps written as flow(-+Theta / (p b), z).
  Point forward_via_flow(Point z) const;
  Point inverse_via_flow(Point z) const;

  /// Bounds: sup |Theta|, sup |d Theta / dx|, sup |d Theta / dy|, table error.
  double theta_sup() const { return theta_sup_; }
  double dtheta_dx() const { return dtheta_dx_; }
  double dtheta_dy() const { return dtheta_dy_; }
  double table_error() const { return table_ ? table_->error_bound() : 0.0; }
  /// Horizontal and vertical gain of Theta in h's output: 1/(q b) and 1 + r/(p q b).
  Real cx() const { return cx_; }
  Real cy() const { return cy_; }

 private:
  RotationVector alpha_;
  long b_;
  long m_;
  std::shared_ptr<const CircleMapPoly> theta_;
  std::optional<ThetaTable> table_;
  BigInt L_;
  Real cx_, cy_, vx_, vy_, inv_pb_;
  double theta_sup_, dtheta_dx_, dtheta_dy_;
};

/// H_n = h_n o ... o h_1.
class ConjugacyStack {
 public:
  ConjugacyStack() = default;
  explicit ConjugacyStack(std::vector<std::shared_ptr<const ShearMap>> shears) : shears_(std::move(shears)) {}

  std::size_t size() const { return shears_.size(); }
  const ShearMap& shear(std::size_t k) const { return *shears_[k]; }
  ConjugacyStack prefix(std::size_t n) const;
  ConjugacyStack pushed(std::shared_ptr<const ShearMap> h) const;

  Point forward_lift(Point z) const;
  Point inverse_lift(Point z) const;
  Point forward(Point z) const { return wrap(forward_lift(z)); }
  Point inverse(Point z) const { return wrap(inverse_lift(z)); }

  /// f = H^{-1} o R_alpha o H, and its i-th iterate (i may be negative).
  Point f(const RotationVector& alpha, Point z) const;
  Point f_iterate(const RotationVector& alpha, const BigInt& i, Point z) const;
  /// Lift F^i(z) - (z + i alpha), the displacement away from the rigid rotation.
  Point lift_deviation(const RotationVector& alpha, const BigInt& i, Point z) const;
  /// p = pi_1 o H, on the circle and on the lift.
  Real p(Point z) const { return frac(forward_lift(z).x); }
  Real p_lift(Point z) const { return forward_lift(z).x; }

 private:
  std::vector<std::shared_ptr<const ShearMap>> shears_;
};

}  // namespace pseudocircle
