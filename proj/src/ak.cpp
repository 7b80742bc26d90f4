#include "pseudocircle/ak.hpp"

#include <cmath>
#include <sstream>

namespace pseudocircle {

namespace {

BigInt mod_floor(const BigInt& a, const BigInt& q) {
  BigInt r = a % q;
  if (r < 0) r += q;
  return r;
}

// n * 2^e as a long double, keeping the top 64 bits of n.
Real scaled(BigInt n, long e) {
  const long bits = n == 0 ? 0 : static_cast<long>(msb(n)) + 1;
  if (bits > 64) {
    n >>= static_cast<unsigned>(bits - 64);
    e += bits - 64;
  }
  return std::ldexp(static_cast<Real>(static_cast<unsigned long long>(n)), static_cast<int>(e));
}

Real to_real(const BigInt& n) { return n < 0 ? -scaled(-n, 0) : scaled(n, 0); }

}  // namespace

Real torus_dist(Point a, Point b) { return std::hypot(circle_dist(a.x, b.x), circle_dist(a.y, b.y)); }

Real unit_fraction(const BigInt& num, const BigInt& den) {
  if (num < 0 || num >= den) throw PreconditionError("unit_fraction: need 0 <= num < den");
  const BigInt top = (num << 64) / den;
  return std::ldexp(static_cast<Real>(static_cast<unsigned long long>(top)), -64);
}

RotationVector::RotationVector(BigInt p, BigInt r, BigInt q) {
  if (q == 0) throw PreconditionError("RotationVector: zero denominator");
  if (q < 0) {
    p = -p;
    r = -r;
    q = -q;
  }
  p = mod_floor(p, q);
  r = mod_floor(r, q);
  const BigInt g = gcd(gcd(p, r), q);
  p_ = p / g;
  r_ = r / g;
  q_ = q / g;
}

Point RotationVector::multiple(const BigInt& i) const {
  return {unit_fraction(mod_floor(i * p_, q_), q_), unit_fraction(mod_floor(i * r_, q_), q_)};
}

std::string RotationVector::str() const {
  std::ostringstream s;
  s << "(" << p_ << "/" << q_ << ", " << r_ << "/" << q_ << ")";
  return s.str();
}

nlohmann::json to_json(const RotationVector& a) { return {{"p", a.p().str()}, {"r", a.r().str()}, {"q", a.q().str()}}; }

RotationVector rotation_from_json(const nlohmann::json& j) {
  auto big = [&](const char* key) {
    const auto& v = j.at(key);
    return v.is_string() ? BigInt(v.get<std::string>()) : BigInt(v.get<long long>());
  };
  return RotationVector(big("p"), big("r"), big("q"));
}

long return_period(const RotationVector& alpha) {
  if (alpha.p() == 0) throw PreconditionError("return_period: first coordinate of alpha is an integer");
  return static_cast<long>(alpha.p() / gcd(alpha.r() % alpha.p(), alpha.p()));
}

Point flow_lift(const RotationVector& alpha, long b, Real t, Point z) {
  const Real vx = unit_fraction(alpha.p(), alpha.q());
  const Real vy = unit_fraction(alpha.r(), alpha.q()) + to_real(alpha.p() * b);
  return {z.x + t * vx, z.y + t * vy};
}

Real frac_product(const BigInt& L, Real x) {
  if (L == 0 || x == 0 || !std::isfinite(x)) return 0;
  int e2 = 0;
  const Real f = std::frexp(std::abs(x), &e2);
  const auto mant = static_cast<unsigned long long>(std::ldexp(f, 64));
  const long k = 64 - e2;  // |x| = mant * 2^-k
  const bool negative = (x < 0) != (L < 0);
  Real v;
  if (k <= 0) return 0;
  const BigInt absL = L < 0 ? BigInt(-L) : L;
  if (absL < (BigInt(1) << 63)) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(static_cast<unsigned long long>(absL)) * mant;
    if (k >= 128) {
      v = std::ldexp(static_cast<Real>(prod), static_cast<int>(-k));
    } else {
      const unsigned __int128 low = prod & ((static_cast<unsigned __int128>(1) << k) - 1);
      v = std::ldexp(static_cast<Real>(low), static_cast<int>(-k));
    }
  } else {
    BigInt prod = absL * mant;
    prod &= (BigInt(1) << static_cast<unsigned>(k)) - 1;
    v = scaled(prod, -k);
  }
  if (negative && v != 0) v = 1 - v;
  return v >= 1 ? 0 : v;
}

ShearMap::ShearMap(RotationVector alpha, long b, std::shared_ptr<const CircleMapPoly> theta, int table_log2)
    : alpha_(std::move(alpha)), b_(b), theta_(std::move(theta)) {
  if (table_log2 > 0) table_.emplace(*theta_, table_log2);
  if (b_ < 1) throw PreconditionError("ShearMap: b must be a positive integer");
  m_ = return_period(alpha_);
  if (theta_->m != m_)
    throw PreconditionError("ShearMap: theta has m = " + std::to_string(theta_->m) + " but alpha needs m = " +
                            std::to_string(m_));
  const BigInt& p = alpha_.p();
  const BigInt& q = alpha_.q();
  const BigInt& r = alpha_.r();
  L_ = m_ * r / p + BigInt(m_) * q * b_;
  if (BigInt(m_) * r % p != 0) throw PreconditionError("ShearMap: m r / p is not an integer");
  const BigInt qb = q * b_;
  cx_ = 1.0L / to_real(qb);
  cy_ = 1.0L + unit_fraction(r, p * qb);
  vx_ = unit_fraction(p, q);
  vy_ = unit_fraction(r, q) + to_real(p * b_);
  inv_pb_ = 1.0L / to_real(p * b_);
  double sup = std::abs(theta_->cos[0]), slope = 0.0;
  for (long k = 1; k <= theta_->degree(); ++k) {
    const double c = std::abs(theta_->cos[static_cast<std::size_t>(k)]) + std::abs(theta_->sin[static_cast<std::size_t>(k)]);
    sup += c;
    slope += 2 * M_PI * static_cast<double>(k) * c;
  }
  theta_sup_ = sup;
  dtheta_dy_ = static_cast<double>(m_) * slope;
  dtheta_dx_ = static_cast<double>(to_real(L_)) * slope;
}

Real ShearMap::Theta(Point z) const {
  const Real u = frac(frac_product(m_, z.y) - frac_product(L_, z.x));
  return table_ ? table_->periodic(static_cast<double>(u)) : eval_periodic(*theta_, static_cast<double>(u));
}

Real ShearMap::Theta_exact(Point z) const {
  const Real u = frac(frac_product(m_, z.y) - frac_product(L_, z.x));
  return eval_periodic(*theta_, static_cast<double>(u));
}

Point ShearMap::forward_lift(Point z) const {
  const Real t = Theta(z);
  return {z.x - t * cx_, z.y - t * cy_};
}

Point ShearMap::inverse_lift(Point z) const {
  const Real t = Theta(z);
  return {z.x + t * cx_, z.y + t * cy_};
}

Point ShearMap::forward_via_flow(Point z) const {
  const Real t = -Theta(z) * inv_pb_;
  return wrap({z.x + t * vx_, z.y + t * vy_});
}

Point ShearMap::inverse_via_flow(Point z) const {
  const Real t = Theta(z) * inv_pb_;
  return wrap({z.x + t * vx_, z.y + t * vy_});
}

ConjugacyStack ConjugacyStack::prefix(std::size_t n) const {
  if (n > shears_.size()) throw PreconditionError("ConjugacyStack::prefix: too long");
  return ConjugacyStack({shears_.begin(), shears_.begin() + static_cast<long>(n)});
}

ConjugacyStack ConjugacyStack::pushed(std::shared_ptr<const ShearMap> h) const {
  auto s = shears_;
  s.push_back(std::move(h));
  return ConjugacyStack(std::move(s));
}

Point ConjugacyStack::forward_lift(Point z) const {
  for (const auto& h : shears_) z = h->forward_lift(z);
  return z;
}

Point ConjugacyStack::inverse_lift(Point z) const {
  for (auto it = shears_.rbegin(); it != shears_.rend(); ++it) z = (*it)->inverse_lift(z);
  return z;
}

Point ConjugacyStack::f(const RotationVector& alpha, Point z) const { return f_iterate(alpha, 1, z); }

Point ConjugacyStack::f_iterate(const RotationVector& alpha, const BigInt& i, Point z) const {
  const Point w = forward(z);
  const Point a = alpha.multiple(i);
  return inverse({w.x + a.x, w.y + a.y});
}

Point ConjugacyStack::lift_deviation(const RotationVector& alpha, const BigInt& i, Point z) const {
  const Point w = forward_lift(z);
  const Point a = alpha.multiple(i);
  const Point back = inverse_lift({w.x + a.x, w.y + a.y});
  return {(back.x - z.x) - a.x, (back.y - z.y) - a.y};
}

}  // namespace pseudocircle
