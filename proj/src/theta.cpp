#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "pseudocircle/crooked.hpp"

namespace pseudocircle {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

long next_pow2(long n) {
  long p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Values of sum_{k<=K} c_k e^{2 pi i k n / M} + conj, for n < M, via one real inverse FFT.
std::vector<double> synthesize(const std::vector<std::complex<double>>& c, long K, long M) {
  fftw_complex* in = fftw_alloc_complex(static_cast<std::size_t>(M / 2 + 1));
  double* out = fftw_alloc_real(static_cast<std::size_t>(M));
  for (long k = 0; k <= M / 2; ++k) {
    const auto v = (k <= K && k < static_cast<long>(c.size())) ? c[static_cast<std::size_t>(k)] : 0.0;
    in[k][0] = v.real();
    in[k][1] = v.imag();
  }
  fftw_plan plan = fftw_plan_dft_c2r_1d(static_cast<int>(M), in, out, FFTW_ESTIMATE);
  fftw_execute(plan);
  std::vector<double> vals(out, out + M);
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);
  return vals;
}

struct Prototype {
  std::vector<double> u;  // breakpoints in [0, 1]
  std::vector<double> g;  // theta - Id at the breakpoints
  std::vector<double> jump;
  double lip = 0.0;
  double mean = 0.0;
};

Prototype make_prototype(const PiecewiseMonotone& proto, long m) {
  Prototype p;
  const double dm = static_cast<double>(m);
  for (std::size_t k = 0; k < proto.size(); ++k) {
    p.u.push_back(proto.x()[k] * dm);
    p.g.push_back(proto.y()[k] - proto.x()[k]);
  }
  p.u.back() = 1.0;
  const std::size_t n = p.u.size();
  std::vector<double> slope(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    slope[k] = (p.g[k + 1] - p.g[k]) / (p.u[k + 1] - p.u[k]);
    p.lip = std::max(p.lip, std::abs(slope[k]));
    p.mean += 0.5 * (p.g[k] + p.g[k + 1]) * (p.u[k + 1] - p.u[k]);
  }
  // Slope jumps at u[0] (= u[n-1] on the circle) and interior breakpoints.
  p.jump.assign(n - 1, 0.0);
  p.jump[0] = slope[0] - slope[n - 2];
  for (std::size_t k = 1; k + 1 < n; ++k) p.jump[k] = slope[k] - slope[k - 1];
  return p;
}

// c_k = -(1 / (4 pi^2 k^2)) sum_j jump_j e^{-2 pi i k u_j}, the exact coefficients
// of a continuous periodic piecewise-linear function.
void extend_coefficients(const Prototype& p, long K, std::vector<std::complex<double>>& c) {
  const long have = static_cast<long>(c.size()) - 1;
  if (have >= K) return;
  const std::size_t nj = p.jump.size();
  std::vector<std::complex<double>> step(nj), z(nj);
  for (std::size_t j = 0; j < nj; ++j) step[j] = std::polar(1.0, -kTwoPi * p.u[j]);
  for (long k = have + 1; k <= K; ++k) {
    if ((k - have - 1) % 512 == 0)
      for (std::size_t j = 0; j < nj; ++j) z[j] = std::polar(1.0, -kTwoPi * std::fmod(static_cast<double>(k) * p.u[j], 1.0));
    std::complex<double> s = 0.0;
    for (std::size_t j = 0; j < nj; ++j) {
      s += p.jump[j] * z[j];
      z[j] *= step[j];
    }
    const double dk = static_cast<double>(k);
    c.push_back(-s / (kTwoPi * kTwoPi * dk * dk));
  }
}

double coefficient_lipschitz(const std::vector<std::complex<double>>& c, long K) {
  double l = 0.0;
  for (long k = 1; k <= K; ++k) l += 2.0 * kTwoPi * static_cast<double>(k) * std::abs(c[static_cast<std::size_t>(k)]);
  return l;
}

double sup_error(const Prototype& p, const std::vector<std::complex<double>>& c, long K, long grid) {
  const long M = std::max(grid, next_pow2(4 * K));
  const auto vals = synthesize(c, K, M);
  double err = 0.0;
  std::size_t seg = 0;
  for (long n = 0; n < M; ++n) {
    const double u = static_cast<double>(n) / static_cast<double>(M);
    while (seg + 2 < p.u.size() && p.u[seg + 1] <= u) ++seg;
    const double w = (u - p.u[seg]) / (p.u[seg + 1] - p.u[seg]);
    const double g = p.g[seg] + w * (p.g[seg + 1] - p.g[seg]);
    err = std::max(err, std::abs(vals[static_cast<std::size_t>(n)] - g));
  }
  const double h = 1.0 / static_cast<double>(M);
  return err + (coefficient_lipschitz(c, K) + p.lip) * h / 2;
}

double derivative_periodic(const CircleMapPoly& th, double u) {
  double s = 0.0;
  const std::complex<double> step = std::polar(1.0, kTwoPi * u);
  std::complex<double> z = 1.0;
  for (long k = 1; k <= th.degree(); ++k) {
    if (k % 512 == 0) z = std::polar(1.0, kTwoPi * std::fmod(static_cast<double>(k) * u, 1.0));
    else z *= step;
    const double dk = kTwoPi * static_cast<double>(k);
    s += dk * (-th.cos[static_cast<std::size_t>(k)] * z.imag() + th.sin[static_cast<std::size_t>(k)] * z.real());
  }
  return s;
}

}  // namespace

std::vector<long> CircleMapPoly::frequencies() const {
  std::vector<long> f;
  for (long k = 0; k <= degree(); ++k) f.push_back(k * m);
  return f;
}

double CircleMapPoly::lipschitz() const {
  double l = 0.0;
  for (long k = 1; k <= degree(); ++k)
    l += kTwoPi * static_cast<double>(k) * (std::abs(cos[static_cast<std::size_t>(k)]) + std::abs(sin[static_cast<std::size_t>(k)]));
  return 1.0 + static_cast<double>(m) * l;
}

double CircleMapPoly::second_derivative_bound() const {
  double l = 0.0;
  for (long k = 1; k <= degree(); ++k) {
    const double w = kTwoPi * static_cast<double>(k);
    l += w * w * (std::abs(cos[static_cast<std::size_t>(k)]) + std::abs(sin[static_cast<std::size_t>(k)]));
  }
  return static_cast<double>(m) * static_cast<double>(m) * l;
}

double eval_periodic(const CircleMapPoly& th, double u) {
  double s = th.cos[0];
  const std::complex<double> step = std::polar(1.0, kTwoPi * u);
  std::complex<double> z = 1.0;
  for (long k = 1; k <= th.degree(); ++k) {
    if (k % 512 == 0) z = std::polar(1.0, kTwoPi * std::fmod(static_cast<double>(k) * u, 1.0));
    else z *= step;
    s += th.cos[static_cast<std::size_t>(k)] * z.real() + th.sin[static_cast<std::size_t>(k)] * z.imag();
  }
  return s;
}

double eval_theta(const CircleMapPoly& th, double x) {
  const double n = std::floor(x);
  const double r = x - n;
  double u = static_cast<double>(th.m) * r;
  u -= std::floor(u);
  return (r + eval_periodic(th, u)) + n;
}

std::vector<double> eval_theta_band(const CircleMapPoly& th, const std::vector<double>& xs) {
  std::vector<double> out(xs.size());
  std::transform(xs.begin(), xs.end(), out.begin(), [&](double x) { return eval_theta(th, x); });
  return out;
}

CircleMapPoly build_theta(double eps, long m, const ThetaOptions& opt) {
  if (!(eps > 0) || m < 1) throw PreconditionError("build_theta: need eps > 0 and m >= 1");
  CircleMapPoly th;
  th.m = m;
  th.eps = eps;
  th.delta_f = opt.delta_ratio * eps;
  const double dm = static_cast<double>(m);
  const double half = 1.0 / (2.0 * dm), period = 1.0 / dm;

  const double proto_eps = opt.proto_ratio * eps;
  const auto up = build_zigzag(proto_eps, 0.0, half, 0.0, 2.0, opt.zigzag_budget);
  const auto down = build_zigzag(proto_eps, half, period, 2.0, period, opt.zigzag_budget);
  std::vector<double> px = up.x(), py = up.y();
  px.insert(px.end(), down.x().begin() + 1, down.x().end());
  py.insert(py.end(), down.y().begin() + 1, down.y().end());
  const PiecewiseMonotone proto(px, py);
  const auto proto_up = is_eps_crooked(proto, proto_eps, 0.0, half, false);
  const auto proto_down = is_eps_crooked(proto, proto_eps, half, period, false);
  if (!proto_up.verified || !proto_down.verified)
    throw CertificationError("build_theta: piecewise-linear prototype is not crooked");

  const Prototype p = make_prototype(proto, m);
  const double work_cap = 2e9;
  std::vector<std::complex<double>> c{p.mean};
  long K = 64, lo = 0;
  for (;;) {
    if (K > opt.max_frequencies || static_cast<double>(K) * static_cast<double>(p.jump.size()) > work_cap) {
      std::ostringstream msg;
      msg << "build_theta: sup error " << th.delta_f << " not reached within " << opt.max_frequencies
          << " frequencies (eps " << eps << ", m " << m << ", " << p.jump.size() << " prototype breakpoints)";
      throw BudgetError("theta", msg.str());
    }
    extend_coefficients(p, K, c);
    if (sup_error(p, c, K, opt.grid) <= th.delta_f) break;
    lo = K;
    K *= 2;
  }
  long hi = K;
  while (hi - lo > 1) {
    const long mid = (lo + hi) / 2;
    (sup_error(p, c, mid, opt.grid) <= th.delta_f ? hi : lo) = mid;
  }
  K = hi;
  th.sup_error = sup_error(p, c, K, opt.grid);
  th.cos.resize(static_cast<std::size_t>(K) + 1);
  th.sin.assign(static_cast<std::size_t>(K) + 1, 0.0);
  th.cos[0] = c[0].real();
  for (long k = 1; k <= K; ++k) {
    th.cos[static_cast<std::size_t>(k)] = 2.0 * c[static_cast<std::size_t>(k)].real();
    th.sin[static_cast<std::size_t>(k)] = -2.0 * c[static_cast<std::size_t>(k)].imag();
  }

  if (!certify_theta(th, opt.grid)) {
    std::ostringstream msg;
    msg << "build_theta: trigonometric polynomial fails crookedness at eps' = " << th.rising.eps;
    throw CertificationError(msg.str());
  }
  return th;
}

bool certify_theta(CircleMapPoly& th, long grid) {
  const long K = th.degree();
  const double dm = static_cast<double>(th.m);
  const double half = 1.0 / (2.0 * dm), period = 1.0 / dm;
  std::vector<std::complex<double>> c(static_cast<std::size_t>(K) + 1);
  for (long k = 1; k <= K; ++k)
    c[static_cast<std::size_t>(k)] = std::complex<double>(th.cos[static_cast<std::size_t>(k)], -th.sin[static_cast<std::size_t>(k)]) / 2.0;

  // Extrema of theta: sign changes of 1 + m P'(u) on a fine grid, refined by bisection.
  const long M = std::max(4 * grid, next_pow2(8 * K));
  std::vector<std::complex<double>> dc(static_cast<std::size_t>(K) + 1);
  for (long k = 1; k <= K; ++k)
    dc[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k)] * std::complex<double>(0.0, kTwoPi * static_cast<double>(k));
  const auto dvals = synthesize(dc, K, M);
  auto slope = [&](double u) { return 1.0 + dm * derivative_periodic(th, u); };
  const double h = 1.0 / static_cast<double>(M);
  std::vector<double> roots;
  for (long n = 0; n + 1 <= M; ++n) {
    const double s0 = 1.0 + dm * dvals[static_cast<std::size_t>(n)];
    const double s1 = 1.0 + dm * dvals[static_cast<std::size_t>((n + 1) % M)];
    if ((s0 > 0) == (s1 > 0)) continue;
    double a = static_cast<double>(n) * h, b = a + h;
    const bool rising = s0 > 0;
    for (int it = 0; it < 40 && b - a > 1e-15; ++it) {
      const double mid = 0.5 * (a + b);
      ((slope(mid) > 0) == rising ? a : b) = mid;
    }
    roots.push_back(0.5 * (a + b));
  }
  std::vector<double> us{0.0, 0.5, 1.0};
  for (double r : roots)
    if (r > 0 && r < 1 && std::abs(r - 0.5) > 1e-13) us.push_back(r);
  std::sort(us.begin(), us.end());
  us.erase(std::unique(us.begin(), us.end()), us.end());
  std::vector<double> sx, sy;
  for (double u : us) {
    const double x = u / dm;
    sx.push_back(x);
    sy.push_back(x + eval_periodic(th, u >= 1.0 ? 0.0 : u));
  }
  th.skeleton = PiecewiseMonotone(sx, sy);
  th.skeleton_tol = th.second_derivative_bound() / (dm * dm) * h * h / 8.0;

  const double eps_check = th.eps - 2.0 * th.delta_f - th.skeleton_tol;
  if (!(eps_check > 0)) {
    th.rising = th.falling = CrookedCertificate{};
    return false;
  }
  th.rising = is_eps_crooked(th.skeleton, eps_check, 0.0, half);
  th.falling = is_eps_crooked(th.skeleton, eps_check, half, period);
  return th.rising.verified && th.falling.verified;
}

ThetaReplay replay_theta(const CircleMapPoly& theta, const ThetaOptions& opt) {
  ThetaReplay out;
  const double dm = static_cast<double>(theta.m);
  const double half = 1.0 / (2.0 * dm), period = 1.0 / dm;
  const double proto_eps = opt.proto_ratio * theta.eps;
  const auto up = build_zigzag(proto_eps, 0.0, half, 0.0, 2.0, opt.zigzag_budget);
  const auto down = build_zigzag(proto_eps, half, period, 2.0, period, opt.zigzag_budget);
  std::vector<double> px = up.x(), py = up.y();
  px.insert(px.end(), down.x().begin() + 1, down.x().end());
  py.insert(py.end(), down.y().begin() + 1, down.y().end());
  const Prototype p = make_prototype(PiecewiseMonotone(px, py), theta.m);
  const long K = theta.degree();
  std::vector<std::complex<double>> c(static_cast<std::size_t>(K) + 1);
  c[0] = theta.cos[0];
  for (long k = 1; k <= K; ++k)
    c[static_cast<std::size_t>(k)] = std::complex<double>(theta.cos[static_cast<std::size_t>(k)], -theta.sin[static_cast<std::size_t>(k)]) / 2.0;
  out.sup_error = sup_error(p, c, K, opt.grid);
  out.within_delta = out.sup_error <= theta.delta_f;
  CircleMapPoly again = theta;
  out.certified = certify_theta(again, opt.grid);
  out.rising_margin = again.rising.margin;
  out.falling_margin = again.falling.margin;
  out.matches_record = out.sup_error == theta.sup_error && again.rising.margin == theta.rising.margin &&
                       again.falling.margin == theta.falling.margin && again.skeleton.x() == theta.skeleton.x() &&
                       again.skeleton.y() == theta.skeleton.y();
  return out;
}

CrookedCertificate is_eps_crooked(const CircleMapPoly& theta, double eps, double a0, double b0, bool with_margin) {
  return is_eps_crooked(theta.skeleton, eps, a0, b0, with_margin);
}

ThetaTable::ThetaTable(const CircleMapPoly& th, int log2_size) : m_(th.m) {
  const long M = std::max(1L << log2_size, next_pow2(4 * std::max(1L, th.degree())));
  std::vector<std::complex<double>> c(static_cast<std::size_t>(th.degree()) + 1);
  c[0] = th.cos[0];
  for (long k = 1; k <= th.degree(); ++k)
    c[static_cast<std::size_t>(k)] = std::complex<double>(th.cos[static_cast<std::size_t>(k)], -th.sin[static_cast<std::size_t>(k)]) / 2.0;
  values_ = synthesize(c, th.degree(), M);
  values_.push_back(values_.front());
  const double h = 1.0 / static_cast<double>(M);
  const double dm = static_cast<double>(th.m);
  error_ = th.second_derivative_bound() / (dm * dm) * h * h / 8.0 + 1e-12;
}

double ThetaTable::periodic(double u) const {
  const double M = static_cast<double>(values_.size() - 1);
  u -= std::floor(u);
  const double s = u * M;
  std::size_t k = static_cast<std::size_t>(s);
  if (k >= values_.size() - 1) k = values_.size() - 2;
  const double w = s - static_cast<double>(k);
  return values_[k] + w * (values_[k + 1] - values_[k]);
}

double ThetaTable::operator()(double x) const {
  const double n = std::floor(x);
  const double r = x - n;
  return (r + periodic(static_cast<double>(m_) * r)) + n;
}

nlohmann::json to_json(const CircleMapPoly& th) {
  return {{"m", th.m},
          {"cos", th.cos},
          {"sin", th.sin},
          {"eps", th.eps},
          {"deltaF", th.delta_f},
          {"sup_error", th.sup_error},
          {"skeleton", to_json(th.skeleton)},
          {"skeleton_tol", th.skeleton_tol},
          {"rising", to_json(th.rising)},
          {"falling", to_json(th.falling)}};
}

CircleMapPoly theta_from_json(const nlohmann::json& j) {
  CircleMapPoly th;
  th.m = j.at("m").get<long>();
  th.cos = j.at("cos").get<std::vector<double>>();
  th.sin = j.at("sin").get<std::vector<double>>();
  if (th.cos.empty() || th.cos.size() != th.sin.size() || th.m < 1) throw IoError("theta json: bad coefficient lists");
  th.eps = j.at("eps").get<double>();
  th.delta_f = j.at("deltaF").get<double>();
  th.sup_error = j.value("sup_error", 0.0);
  th.skeleton = piecewise_from_json(j.at("skeleton"));
  th.skeleton_tol = j.value("skeleton_tol", 0.0);
  th.rising = certificate_from_json(j.at("rising"));
  th.falling = certificate_from_json(j.at("falling"));
  return th;
}

}  // namespace pseudocircle
