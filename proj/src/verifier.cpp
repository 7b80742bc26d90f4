#include "pseudocircle/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace pseudocircle {

using nlohmann::json;

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::fail: return "fail";
  }
  return "fail";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "pass") return Verdict::pass;
  if (s == "inconclusive") return Verdict::inconclusive;
  if (s == "fail") return Verdict::fail;
  throw IoError("unknown verdict '" + s + "'");
}

Verdict combine(Verdict a, Verdict b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

json to_json(const PropertyReport& r) {
  return {{"id", r.id},
          {"n", r.n},
          {"verdict", to_string(r.verdict)},
          {"measured", r.measured},
          {"counterexample", r.counterexample},
          {"sampling", r.sampling},
          {"note", r.note}};
}

PropertyReport report_from_json(const json& j) {
  PropertyReport r;
  r.id = j.at("id").get<std::string>();
  r.n = j.at("n").get<int>();
  r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  r.measured = j.value("measured", json::object());
  r.counterexample = j.value("counterexample", json(nullptr));
  r.sampling = j.value("sampling", json::object());
  r.note = j.value("note", std::string());
  return r;
}

std::string text_table(const std::vector<PropertyReport>& reports) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "property" << std::setw(4) << "n" << std::setw(14) << "verdict"
      << "measured\n";
  for (const auto& r : reports) {
    std::string m;
    for (auto it = r.measured.begin(); it != r.measured.end(); ++it) {
      if (it->is_array() || it->is_object()) continue;
      if (!m.empty()) m += "  ";
      m += it.key() + "=" + it->dump();
    }
    out << std::left << std::setw(14) << r.id << std::setw(4) << r.n << std::setw(14) << to_string(r.verdict) << m
        << "\n";
    if (!r.note.empty()) out << std::setw(32) << "" << r.note << "\n";
  }
  return out.str();
}

json to_json(const VerifyOptions& o) {
  return {{"x_samples", o.x_samples},         {"boundary_samples", o.boundary_samples},
          {"claim_omegas", o.claim_omegas},   {"grid", o.grid},
          {"iterate_grid", o.iterate_grid},   {"iterate_samples", o.iterate_samples},
          {"density_seeds", o.density_seeds}, {"density_points", o.density_points},
          {"density_probe", o.density_probe}, {"birkhoff_seeds", o.birkhoff_seeds},
          {"birkhoff_iterates", o.birkhoff_iterates}, {"eta_C", o.eta_C},
          {"seed", o.seed}};
}

VerifyOptions verify_options_from_json(const json& j, VerifyOptions o) {
  o.x_samples = j.value("x_samples", o.x_samples);
  o.boundary_samples = j.value("boundary_samples", o.boundary_samples);
  o.claim_omegas = j.value("claim_omegas", o.claim_omegas);
  o.grid = j.value("grid", o.grid);
  o.iterate_grid = j.value("iterate_grid", o.iterate_grid);
  o.iterate_samples = j.value("iterate_samples", o.iterate_samples);
  o.density_seeds = j.value("density_seeds", o.density_seeds);
  o.density_points = j.value("density_points", o.density_points);
  o.density_probe = j.value("density_probe", o.density_probe);
  o.birkhoff_seeds = j.value("birkhoff_seeds", o.birkhoff_seeds);
  o.birkhoff_iterates = j.value("birkhoff_iterates", o.birkhoff_iterates);
  o.eta_C = j.value("eta_C", o.eta_C);
  o.seed = j.value("seed", o.seed);
  if (o.x_samples < 1 || o.boundary_samples < 8 || o.grid < 1 || o.iterate_grid < 1 || o.density_seeds < 1 ||
      o.density_points < 1 || o.density_probe < 1 || o.claim_omegas < 1 || !(o.eta_C > 0))
    throw PreconditionError("verify options: sample counts must be positive");
  return o;
}

std::vector<Point> sample_points(std::uint64_t seed, std::size_t count) {
  std::uint64_t s = seed;
  auto next = [&]() {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::vector<Point> out(count);
  for (auto& p : out) {
    p.x = std::ldexp(static_cast<Real>(next() >> 11), -53);
    p.y = std::ldexp(static_cast<Real>(next() >> 11), -53);
  }
  return out;
}

namespace {

double tolerance(const CircleMapPoly& theta, const ThetaTable& table) { return theta.skeleton_tol + table.error_bound(); }

CircleInterval outer_interval(long j, long N) {
  const double dn = static_cast<double>(N);
  return {(static_cast<double>(j) - 1.25) / dn, (static_cast<double>(j) + 0.25) / dn};
}

ChainLift<1> standard_lift(long N) {
  std::vector<IntervalCell> cells;
  for (long j = 0; j < N; ++j) cells.push_back(IntervalCell{{outer_interval(j, N)}});
  return ChainLift<1>(std::move(cells), {1});
}

ChainLift<2> strip_lift(double x, double eps, long N) {
  std::vector<RectCell> cells;
  for (long j = 0; j < N; ++j) cells.push_back(RectCell{{CircleInterval{x - eps, x + eps}, outer_interval(j, N)}});
  return ChainLift<2>(std::move(cells), {0, 1});
}

struct MapOutcome {
  bool mapped = false;
  bool crooked = false;
  std::string error;
  CrookedVerdict verdict;
};

template <std::size_t D>
MapOutcome map_and_check(const ChainLift<D>& inner, const ChainLift<D>& outer) {
  MapOutcome out;
  try {
    const auto map = chain_map(inner, outer);
    out.mapped = true;
    out.verdict = is_crooked_inside(map, 4);
    out.crooked = out.verdict.crooked;
  } catch (const ChainError& e) {
    out.error = e.what();
  }
  return out;
}

json counterexample_json(const CrookedVerdict& v) {
  if (!v.counterexample) return nullptr;
  return {{"window", {v.counterexample->first, v.counterexample->second}}};
}

// Boundary of the lifted rectangle [x0, x1] x [y0, y1], `per_side` points per side.
std::vector<Point> rectangle_boundary(Real x0, Real x1, Real y0, Real y1, int per_side) {
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(4 * per_side));
  const Real d = static_cast<Real>(per_side - 1);
  for (int k = 0; k < per_side; ++k) {
    const Real t = static_cast<Real>(k) / d;
    pts.push_back({x0 + (x1 - x0) * t, y0});
    pts.push_back({x1, y0 + (y1 - y0) * t});
    pts.push_back({x1 - (x1 - x0) * t, y1});
    pts.push_back({x0, y1 - (y1 - y0) * t});
  }
  return pts;
}

double hull_diameter(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) {
    double d = 0.0;
    for (const auto& a : pts)
      for (const auto& b : pts) d = std::max(d, std::hypot(a.first - b.first, a.second - b.second));
    return d;
  }
  auto cross = [](const auto& o, const auto& a, const auto& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<double, double>> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  double d = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j)
      d = std::max(d, std::hypot(hull[i].first - hull[j].first, hull[i].second - hull[j].second));
  return d;
}

// Lipschitz bound of h^{-1} along horizontal and vertical moves.
std::pair<double, double> inverse_gain(const ShearMap& h) {
  const double c = static_cast<double>(h.cx() + h.cy());
  return {1.0 + c * h.dtheta_dx(), 1.0 + c * h.dtheta_dy()};
}

double stack_lipschitz(const ConjugacyStack& H) {
  double l = 1.0;
  for (std::size_t k = 0; k < H.size(); ++k) {
    const auto [gx, gy] = inverse_gain(H.shear(k));
    l *= std::max(gx, gy);
  }
  return l;
}

Point rotate(Point w, Point a) { return {w.x + a.x, w.y + a.y}; }

}  // namespace

CircleInterval theta_image(const CircleMapPoly& theta, const ThetaTable& table, double a, double b) {
  double lo = std::min(table(a), table(b));
  double hi = std::max(table(a), table(b));
  const double period = 1.0 / static_cast<double>(theta.m);
  const auto& sx = theta.skeleton.x();
  const long j0 = static_cast<long>(std::floor(a / period));
  const long j1 = static_cast<long>(std::floor(b / period));
  for (long j = j0; j <= j1; ++j) {
    for (std::size_t k = 0; k + 1 < sx.size(); ++k) {
      const double x = static_cast<double>(j) * period + sx[k];
      if (x <= a || x >= b) continue;
      const double v = table(x);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double tol = tolerance(theta, table);
  return {lo - tol, hi + tol};
}

PropertyReport verify_claim(const CircleMapPoly& theta, long N_outer, long N_inner, int omegas) {
  PropertyReport rep;
  rep.id = "claim";
  rep.sampling = {{"omegas", omegas}, {"N_outer", N_outer}, {"N_inner", N_inner}};
  const ThetaTable table(theta, 18);
  const double tol = tolerance(theta, table);
  const auto outer = standard_lift(N_outer);
  const double dn = static_cast<double>(N_inner);
  double max_len = 0.0;
  std::size_t windows = 0;
  json per = json::array();
  for (int w = 0; w < omegas; ++w) {
    const double omega = (w + 0.5) / omegas;
    std::vector<IntervalCell> inflated, raw;
    for (long i = 0; i < N_inner; ++i) {
      const double a = (static_cast<double>(i) - 1.25) / dn - omega, b = (static_cast<double>(i) + 0.25) / dn - omega;
      const auto iv = theta_image(theta, table, a, b).shifted(omega);
      max_len = std::max(max_len, iv.length() - 2 * tol);
      inflated.push_back(IntervalCell{{iv}});
      raw.push_back(IntervalCell{{CircleInterval{iv.lo + tol, iv.hi - tol}}});
    }
    const auto res = map_and_check(ChainLift<1>(inflated, {1}), outer);
    windows += res.verdict.windows_checked;
    Verdict v = Verdict::pass;
    if (!res.mapped || !res.crooked) {
      const auto again = map_and_check(ChainLift<1>(raw, {1}), outer);
      v = (!again.mapped || !again.crooked) ? Verdict::fail : Verdict::inconclusive;
      if (rep.counterexample.is_null()) {
        rep.counterexample = {{"omega", omega}, {"reason", !res.mapped ? "containment: " + res.error : "not crooked"}};
        if (res.mapped) rep.counterexample["window"] = counterexample_json(res.verdict)["window"];
      }
    }
    rep.verdict = combine(rep.verdict, v);
    per.push_back({{"omega", omega}, {"verdict", to_string(v)}});
  }
  rep.measured = {{"max_image_length", max_len},
                  {"length_bound", 0.5 / static_cast<double>(N_outer)},
                  {"windows", windows},
                  {"per_omega", per}};
  return rep;
}

double shear_image_gap(const ShearMap& h, long N_inner, double eps_inner, int x_samples, int boundary_samples) {
  const ThetaTable table(h.theta(), 18);
  const int per_side = std::max(2, boundary_samples / 4);
  const Real dn = static_cast<Real>(N_inner);
  const Real m = static_cast<Real>(h.m());
  double gap = 0.0;
  for (int s = 0; s < x_samples; ++s) {
    const Real x = static_cast<Real>(s) / x_samples;
    const Real omega = frac_product(h.slope_integer(), x) / m;
    auto probe = [&](Point p) {
      const Point w = h.inverse_lift(p);
      const Real target = table(static_cast<double>(p.y - omega)) + omega;
      gap = std::max(gap, static_cast<double>(std::hypot(w.x - x, w.y - target)));
    };
    for (long i = 0; i < N_inner; ++i) {
      const Real y0 = (static_cast<Real>(i) - 1.25L) / dn, y1 = (static_cast<Real>(i) + 0.25L) / dn;
      for (const auto& p : rectangle_boundary(x - eps_inner, x + eps_inner, y0, y1, per_side)) probe(p);
      for (int k = 0; k < per_side; ++k) probe({x, y0 + (y1 - y0) * k / (per_side - 1)});
    }
  }
  return gap;
}

PropertyReport verify_P1(const ConjugacyStack& H_n, const ShearMap& h, int n, long N_n, double eps_n, long N_next,
                         double eps_next, const VerifyOptions& opt) {
  PropertyReport rep;
  rep.id = "P1";
  rep.n = n;
  const int per_side = std::max(2, opt.boundary_samples / 4);
  rep.sampling = {{"x_samples", opt.x_samples}, {"boundary_samples", 4 * per_side}};
  const auto [gx, gy] = inverse_gain(h);
  const double sv = 1.5 / static_cast<double>(N_next) / (per_side - 1);
  const double sh = 2.0 * eps_next / (per_side - 1);
  const double infl_h = 0.5 * std::max(gx * sh, gy * sv);
  const double infl_H = stack_lipschitz(H_n) * infl_h;
  const double diam_bound = 1.0 / (n + 1);
  const Real dn = static_cast<Real>(N_next);

  Verdict crooked_v = Verdict::pass, contain_v = Verdict::pass, diam_v = Verdict::pass;
  double worst_diam = 0.0, worst_margin = std::numeric_limits<double>::infinity();
  std::size_t windows = 0;
  json per = json::array();
  for (int s = 0; s < opt.x_samples; ++s) {
    const double x = static_cast<double>(s) / opt.x_samples;
    std::vector<RectCell> inflated, raw;
    double max_diam = 0.0, margin = std::numeric_limits<double>::infinity();
    for (long i = 0; i < N_next; ++i) {
      const Real y0 = (static_cast<Real>(i) - 1.25L) / dn, y1 = (static_cast<Real>(i) + 0.25L) / dn;
      double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_lo = x_lo, y_hi = -x_lo;
      std::vector<std::pair<double, double>> far;
      for (const auto& p : rectangle_boundary(x - eps_next, x + eps_next, y0, y1, per_side)) {
        const Point w = h.inverse_lift(p);
        x_lo = std::min(x_lo, static_cast<double>(w.x));
        x_hi = std::max(x_hi, static_cast<double>(w.x));
        y_lo = std::min(y_lo, static_cast<double>(w.y));
        y_hi = std::max(y_hi, static_cast<double>(w.y));
        const Point v = H_n.inverse_lift(w);
        far.emplace_back(static_cast<double>(v.x), static_cast<double>(v.y));
      }
      raw.push_back(RectCell{{CircleInterval{x_lo, x_hi}, CircleInterval{y_lo, y_hi}}});
      inflated.push_back(
          RectCell{{CircleInterval{x_lo - infl_h, x_hi + infl_h}, CircleInterval{y_lo - infl_h, y_hi + infl_h}}});
      margin = std::min({margin, eps_n - (x_hi - x), eps_n - (x - x_lo)});
      max_diam = std::max(max_diam, hull_diameter(std::move(far)));
    }
    // Containment of the annulus.
    Verdict cv = margin - infl_h > 0 ? Verdict::pass : (margin <= 0 ? Verdict::fail : Verdict::inconclusive);
    // Chain map and crookedness.
    const auto outer = strip_lift(x, eps_n, N_n);
    const auto res = map_and_check(ChainLift<2>(inflated, {0, 1}), outer);
    windows += res.verdict.windows_checked;
    Verdict kv = Verdict::pass;
    if (!res.mapped || !res.crooked) {
      const auto again = map_and_check(ChainLift<2>(raw, {0, 1}), outer);
      kv = (!again.mapped || !again.crooked) ? Verdict::fail : Verdict::inconclusive;
      if (rep.counterexample.is_null()) {
        rep.counterexample = {{"x", x}, {"reason", !res.mapped ? "chain map: " + res.error : "not crooked"}};
        if (res.mapped) rep.counterexample["window"] = counterexample_json(res.verdict)["window"];
      }
    }
    Verdict dv = max_diam + 2 * infl_H < diam_bound ? Verdict::pass
                                                     : (max_diam >= diam_bound ? Verdict::fail : Verdict::inconclusive);
    crooked_v = combine(crooked_v, kv);
    contain_v = combine(contain_v, cv);
    diam_v = combine(diam_v, dv);
    worst_diam = std::max(worst_diam, max_diam);
    worst_margin = std::min(worst_margin, margin);
    per.push_back({{"x", x},
                   {"crooked", to_string(kv)},
                   {"containment_margin", margin},
                   {"max_diameter", max_diam}});
  }
  rep.verdict = combine(crooked_v, combine(contain_v, diam_v));
  rep.measured = {{"crooked", to_string(crooked_v)},
                  {"containment", to_string(contain_v)},
                  {"diameters", to_string(diam_v)},
                  {"max_diameter", worst_diam},
                  {"diameter_bound", diam_bound},
                  {"diameter_slack", 2 * infl_H},
                  {"containment_margin", worst_margin},
                  {"containment_slack", infl_h},
                  {"windows", windows},
                  {"per_x", per}};
  return rep;
}

namespace {

struct Vec {
  BigInt x, y;
};

BigInt dot(const Vec& a, const Vec& b) { return a.x * b.x + a.y * b.y; }

// floor(a / b) for b > 0.
BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if (q * b > a) q -= 1;
  return q;
}

// a u + b v = gcd(a, b) >= 0.
BigInt ext_gcd(const BigInt& a, const BigInt& b, BigInt& u, BigInt& v) {
  BigInt r0 = a, r1 = b, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (r1 != 0) {
    const BigInt q = r0 / r1;
    BigInt tmp = r0 - q * r1;
    r0 = r1;
    r1 = tmp;
    tmp = s0 - q * s1;
    s0 = s1;
    s1 = tmp;
    tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
  }
  if (r0 < 0) {
    r0 = -r0;
    s0 = -s0;
    t0 = -t0;
  }
  u = s0;
  v = t0;
  return r0;
}

Real big_to_real(const BigInt& n) {
  // Values here stay far below the range of long double.
  return static_cast<Real>(n.convert_to<long double>());
}

}  // namespace

Real orbit_covering_radius(const RotationVector& alpha) {
  const BigInt& p = alpha.p();
  const BigInt& r = alpha.r();
  const BigInt& q = alpha.q();
  // q * (Z^2 + Z alpha) is generated by (q, 0), (0, q), (p, r).
  BigInt u, v;
  const BigInt g = ext_gcd(p, q, u, v);
  const BigInt d = gcd(q, q * r / g);
  Vec b1{g, u * r}, b2{0, d};
  for (;;) {
    if (dot(b1, b1) > dot(b2, b2)) std::swap(b1, b2);
    const BigInt n11 = dot(b1, b1);
    const BigInt mu = floor_div(2 * dot(b1, b2) + n11, 2 * n11);
    if (mu == 0) break;
    b2 = {b2.x - mu * b1.x, b2.y - mu * b1.y};
  }
  if (dot(b1, b2) < 0) b2 = {-b2.x, -b2.y};
  const Vec e{b2.x - b1.x, b2.y - b1.y};
  const BigInt det = b1.x * b2.y - b1.y * b2.x;
  const Real l1 = std::sqrt(big_to_real(dot(b1, b1))), l2 = std::sqrt(big_to_real(dot(b2, b2)));
  const Real l3 = std::sqrt(big_to_real(dot(e, e)));
  const Real R = l1 * l2 * l3 / (2 * std::abs(big_to_real(det)));
  return R / big_to_real(q);
}

namespace {

// Upper bound for the covering radius of a point set of T^2, by probing a
// grid and searching buckets; also returns the largest probe distance.
std::pair<double, double> covering_bound(const std::vector<Point>& pts, int probe) {
  const int B = 64;
  std::vector<std::vector<Point>> bucket(B * B);
  for (const auto& p : pts) {
    const int bx = std::min(B - 1, static_cast<int>(p.x * B)), by = std::min(B - 1, static_cast<int>(p.y * B));
    bucket[static_cast<std::size_t>(bx * B + by)].push_back(p);
  }
  double worst = 0.0;
  for (int i = 0; i < probe; ++i) {
    for (int j = 0; j < probe; ++j) {
      const Point c{(i + 0.5L) / probe, (j + 0.5L) / probe};
      const int cx = static_cast<int>(c.x * B), cy = static_cast<int>(c.y * B);
      double best = std::numeric_limits<double>::infinity();
      for (int ring = 0; ring <= B / 2; ++ring) {
        for (int dx = -ring; dx <= ring; ++dx) {
          for (int dy = -ring; dy <= ring; ++dy) {
            if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
            const auto& cell = bucket[static_cast<std::size_t>(((cx + dx) % B + B) % B * B + ((cy + dy) % B + B) % B)];
            for (const auto& p : cell) best = std::min(best, static_cast<double>(torus_dist(c, p)));
          }
        }
        if (best <= static_cast<double>(ring) / B) break;
      }
      worst = std::max(worst, best);
    }
  }
  return {worst + std::sqrt(0.5) / probe, worst};
}

BigRational circle_gap(const BigRational& a, const BigRational& b) {
  BigRational d = a - b;
  BigInt fl = floor_div(numerator(d), denominator(d));
  d -= BigRational(fl);
  if (d > BigRational(1, 2)) d = 1 - d;
  return d;
}

}  // namespace

PropertyReport verify_P2_P3(const RotationVector& a_n, const RotationVector& a_next, int n, const ConjugacyStack& H_next,
                            const VerifyOptions& opt) {
  PropertyReport rep;
  rep.id = "P2-P3";
  rep.n = n;
  const BigRational bound = BigRational(1) / (BigRational(BigInt(1) << (n + 1)) * BigRational(a_n.q()));
  const BigRational gx = circle_gap(a_next.x(), a_n.x()), gy = circle_gap(a_next.y(), a_n.y());
  const bool close = gx < bound && gy < bound;
  const bool distinct = !(a_next == a_n);
  const Real cover = orbit_covering_radius(a_next);
  const double dense_bound = std::ldexp(1.0, -(n + 1));
  const bool rot_dense = cover <= dense_bound;

  const int side = std::max(1, static_cast<int>(std::lround(std::sqrt(opt.density_seeds))));
  const long count = a_next.q() < opt.density_points ? static_cast<long>(a_next.q()) : opt.density_points;
  const bool full_orbit = BigInt(count) == a_next.q();
  std::vector<Point> steps(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) steps[static_cast<std::size_t>(k)] = a_next.multiple(k);
  double f_bound = 0.0, f_probe = 0.0;
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const Point seed{(i + 0.5L) / side, (j + 0.5L) / side};
      const Point w = H_next.forward(seed);
      std::vector<Point> orbit;
      orbit.reserve(steps.size());
      for (const auto& a : steps) orbit.push_back(H_next.inverse(rotate(w, a)));
      const auto [ub, probe] = covering_bound(orbit, opt.density_probe);
      f_bound = std::max(f_bound, ub);
      f_probe = std::max(f_probe, probe);
    }
  }
  const double f_thr = 1.0 / (n + 1);
  const Verdict f_v =
      f_bound <= f_thr ? Verdict::pass : ((full_orbit && f_probe > f_thr) ? Verdict::fail : Verdict::inconclusive);
  const Verdict p2 = close && distinct && rot_dense ? Verdict::pass : Verdict::fail;
  rep.verdict = combine(p2, f_v);
  rep.measured = {{"dx", gx.convert_to<double>()},
                  {"dy", gy.convert_to<double>()},
                  {"closeness_bound", bound.convert_to<double>()},
                  {"distinct", distinct},
                  {"rotation_covering_radius", static_cast<double>(cover)},
                  {"rotation_density_bound", dense_bound},
                  {"f_covering_bound", f_bound},
                  {"f_density_bound", f_thr},
                  {"orbit_points", count},
                  {"full_orbit", full_orbit}};
  rep.sampling = {{"seeds", side * side}, {"probe", opt.density_probe}};
  if (!close) rep.counterexample = {{"reason", "alpha moved too far"}};
  else if (!distinct) rep.counterexample = {{"reason", "alpha unchanged"}};
  else if (!rot_dense) rep.counterexample = {{"reason", "rotation orbit not dense enough"}};
  return rep;
}

std::vector<long> iterate_sample(long limit, long dense, long spread) {
  std::vector<long> out;
  for (long i = 1; i <= std::min(limit, dense); ++i) out.push_back(i);
  if (limit > dense) {
    for (long j = 1; j <= spread; ++j) {
      const long i = dense + static_cast<long>(std::llround(static_cast<double>(limit - dense) * j / spread));
      if (i > out.back()) out.push_back(i);
    }
    if (out.back() != limit) out.push_back(limit);
  }
  return out;
}

namespace {

double d0_iterate(const StageView& a, const StageView& b, long i, int grid) {
  double worst = 0.0;
  for (int gx = 0; gx < grid; ++gx) {
    for (int gy = 0; gy < grid; ++gy) {
      const Point z{(gx + 0.5L) / grid, (gy + 0.5L) / grid};
      worst = std::max(worst, static_cast<double>(torus_dist(a.H.f_iterate(a.alpha, i, z), b.H.f_iterate(b.alpha, i, z))));
      worst = std::max(worst, static_cast<double>(torus_dist(a.H.f_iterate(a.alpha, -i, z), b.H.f_iterate(b.alpha, -i, z))));
    }
  }
  return worst;
}

constexpr double kDegenerate = 1e-9;

long clamp_long(const BigInt& v) {
  const BigInt cap = BigInt(1) << 62;
  return static_cast<long>(v < cap ? v : cap);
}

}  // namespace

PropertyReport verify_P4_P5(const StageView* prev, const StageView& cur, const StageView& next, int n,
                            const VerifyOptions& opt) {
  PropertyReport rep;
  rep.id = "P4-P5";
  rep.n = n;
  // (a) iterates up to q_n.
  const auto is = iterate_sample(clamp_long(cur.alpha.q()), 16, opt.iterate_samples);
  Verdict a_v = Verdict::pass;
  double worst_ratio = 0.0;
  long degenerate_count = 0;
  json rows = json::array();
  for (long i : is) {
    const double d_next = d0_iterate(next, cur, i, opt.iterate_grid);
    json row = {{"i", i}, {"d_next", d_next}};
    if (prev && n >= 1) {
      const double d_prev = d0_iterate(cur, *prev, i, opt.iterate_grid);
      // f_n^i = f_{n-1}^i (both the identity at i = q_n): only the 1/n bound applies.
      const bool degenerate = d_prev <= kDegenerate;
      const double bound = degenerate ? 1.0 / n : std::min(0.5 * d_prev, 1.0 / n);
      if (degenerate) ++degenerate_count;
      row["d_prev"] = d_prev;
      row["bound"] = bound;
      if (!(d_next < bound)) {
        a_v = Verdict::fail;
        if (rep.counterexample.is_null()) rep.counterexample = {{"reason", "iterate closeness"}, {"i", i}};
      }
      if (bound > 0) worst_ratio = std::max(worst_ratio, d_next / bound);
    }
    rows.push_back(row);
  }
  // (b) closeness to f_n against eta_n / 2.
  const double qn = static_cast<double>(cur.alpha.q().convert_to<long double>());
  const double eta = 1.0 / (opt.eta_C * qn * qn);
  const double d1 = d0_iterate(next, cur, 1, opt.grid);
  const Verdict b_v = d1 < eta / 2 ? Verdict::pass : Verdict::fail;
  if (b_v == Verdict::fail && rep.counterexample.is_null()) rep.counterexample = {{"reason", "d0(f_next, f) >= eta/2"}};
  // Rotation vectors of f_{n+1} near alpha_n.
  const auto seeds = sample_points(opt.seed + 17, static_cast<std::size_t>(opt.birkhoff_seeds));
  const Point an = cur.alpha.as_point(), a1 = next.alpha.as_point();
  const Real K = static_cast<Real>(opt.birkhoff_iterates);
  double birk = 0.0;
  for (const auto& z : seeds) {
    const Point dev = next.H.lift_deviation(next.alpha, opt.birkhoff_iterates, z);
    const Point est{a1.x + dev.x / K, a1.y + dev.y / K};
    birk = std::max(birk, static_cast<double>(torus_dist(est, an)));
  }
  const Verdict r_v = (n == 0 || birk <= 1.0 / n) ? Verdict::pass : Verdict::fail;
  // P5.
  double dp = 0.0;
  for (int gx = 0; gx < opt.grid; ++gx)
    for (int gy = 0; gy < opt.grid; ++gy) {
      const Point z{(gx + 0.5L) / opt.grid, (gy + 0.5L) / opt.grid};
      dp = std::max(dp, static_cast<double>(circle_dist(next.H.p(z), cur.H.p(z))));
    }
  const double p_bound = std::ldexp(1.0, -n);
  const Verdict p_v = dp < p_bound ? Verdict::pass : Verdict::fail;
  if (p_v == Verdict::fail && rep.counterexample.is_null()) rep.counterexample = {{"reason", "p distance"}};
  rep.verdict = combine(combine(a_v, b_v), combine(r_v, p_v));
  rep.measured = {{"iterates", to_string(a_v)},
                  {"worst_iterate_ratio", worst_ratio},
                  {"degenerate_iterates", degenerate_count},
                  {"d0_f", d1},
                  {"eta", eta},
                  {"eta_C", opt.eta_C},
                  {"closeness", to_string(b_v)},
                  {"birkhoff_distance", birk},
                  {"rotation", to_string(r_v)},
                  {"p_distance", dp},
                  {"p_bound", p_bound},
                  {"iterate_rows", rows}};
  rep.sampling = {{"grid", opt.grid},
                  {"iterate_grid", opt.iterate_grid},
                  {"iterates", is.size()},
                  {"birkhoff_seeds", opt.birkhoff_seeds},
                  {"birkhoff_iterates", opt.birkhoff_iterates}};
  if (n == 0) rep.note = "iterate bound is vacuous at n = 0";
  return rep;
}

PropertyReport verify_BF(const std::vector<PropertyReport>& p1, const std::vector<long>& N, const std::vector<double>& eps,
                         const VerifyOptions& opt) {
  if (p1.empty()) throw PreconditionError("verify_BF: needs at least two stages");
  if (N.size() != eps.size() || N.size() < p1.size() + 1) throw PreconditionError("verify_BF: stage lists do not match");
  PropertyReport rep;
  rep.id = "BF";
  Verdict nest = Verdict::pass, closure = Verdict::pass, schedule = Verdict::pass, homotopy = Verdict::pass;
  json diams = json::array(), margins = json::array();
  double last = std::numeric_limits<double>::infinity();
  for (const auto& r : p1) {
    nest = combine(nest, verdict_from_string(r.measured.at("crooked").get<std::string>()));
    const double margin = r.measured.at("containment_margin").get<double>();
    const double slack = r.measured.at("containment_slack").get<double>();
    closure = combine(closure, margin - slack > 0 ? Verdict::pass : (margin <= 0 ? Verdict::fail : Verdict::inconclusive));
    const double d = r.measured.at("max_diameter").get<double>();
    const double bound = r.measured.at("diameter_bound").get<double>();
    if (!(d < last) || !(d < bound)) schedule = Verdict::fail;
    last = d;
    diams.push_back(d);
    margins.push_back(margin);
  }
  for (std::size_t n = 0; n < N.size(); ++n) {
    for (int s = 0; s < opt.x_samples; ++s) {
      const double x = static_cast<double>(s) / opt.x_samples;
      try {
        const auto lift = lift_chain(strip_chain(x, eps[n], N[n]));
        if (lift.homotopy() != std::array<long, 2>{0, 1} && lift.homotopy() != std::array<long, 2>{0, -1})
          homotopy = Verdict::fail;
      } catch (const PreconditionError&) {
        // Elements too large to lift: undecided.
        homotopy = combine(homotopy, Verdict::inconclusive);
      } catch (const ChainError&) {
        homotopy = Verdict::fail;
      }
    }
  }
  rep.verdict = combine(combine(nest, closure), combine(schedule, homotopy));
  rep.measured = {{"crooked_nesting", to_string(nest)},
                  {"closure", to_string(closure)},
                  {"diameter_schedule", to_string(schedule)},
                  {"homotopy", to_string(homotopy)},
                  {"homotopy_type", {0, 1}},
                  {"max_diameters", diams},
                  {"containment_margins", margins}};
  rep.n = static_cast<int>(p1.size());
  return rep;
}

PropertyReport verify_semiconjugacy(const ConjugacyStack& H, const RotationVector& alpha, int n, const VerifyOptions& opt,
                                    long iteration_points) {
  PropertyReport rep;
  rep.id = "semiconj";
  rep.n = n;
  const Real shift = alpha.as_point().x;
  double err = 0.0;
  for (int gx = 0; gx < opt.grid; ++gx)
    for (int gy = 0; gy < opt.grid; ++gy) {
      const Point z{(gx + 0.5L) / opt.grid, (gy + 0.5L) / opt.grid};
      err = std::max(err, static_cast<double>(circle_dist(H.p(H.f(alpha, z)), H.p(z) + shift)));
    }
  const double work_cap = 2e7;
  const long q = clamp_long(alpha.q());
  long points = iteration_points;
  if (static_cast<double>(q) * static_cast<double>(points) > work_cap)
    points = std::max(1L, static_cast<long>(work_cap / static_cast<double>(q)));
  const bool genuine = static_cast<double>(q) <= work_cap;
  double ret = 0.0;
  const auto seeds = sample_points(opt.seed + 29, static_cast<std::size_t>(genuine ? points : iteration_points));
  for (const auto& z0 : seeds) {
    Point z = z0;
    if (genuine)
      for (long i = 0; i < q; ++i) z = H.f(alpha, z);
    else
      z = H.f_iterate(alpha, alpha.q(), z0);
    ret = std::max(ret, static_cast<double>(torus_dist(z, z0)));
  }
  const double ret_bound = std::max(1, n) * 1e-7;
  rep.verdict = err <= 1e-9 && ret <= ret_bound ? Verdict::pass : Verdict::fail;
  rep.measured = {{"semiconjugacy_error", err}, {"period_error", ret}, {"period_bound", ret_bound}, {"q", q}};
  rep.sampling = {{"grid", opt.grid}, {"points", seeds.size()}, {"genuine_iteration", genuine}};
  return rep;
}

std::vector<DeviationRow> estimate_deviations(const ConjugacyStack& H, const RotationVector& alpha, std::array<long, 2> v,
                                              const std::vector<long>& ks, const std::vector<Point>& seeds) {
  std::vector<DeviationRow> out;
  for (long k : ks) {
    double worst = 0.0;
    if (k != 0)
      for (const auto& z : seeds) {
        const Point d = H.lift_deviation(alpha, k, z);
        worst = std::max(worst, std::abs(static_cast<double>(d.x * v[0] + d.y * v[1])));
      }
    out.push_back({k, worst});
  }
  return out;
}

double p_oscillation(const ConjugacyStack& H, int grid) {
  double worst = 0.0;
  for (int gx = 0; gx < grid; ++gx)
    for (int gy = 0; gy < grid; ++gy) {
      const Point z{(gx + 0.5L) / grid, (gy + 0.5L) / grid};
      worst = std::max(worst, std::abs(static_cast<double>(H.p_lift(z) - z.x)));
    }
  return worst;
}

}  // namespace pseudocircle
