#include "pseudocircle/construction.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace pseudocircle {

using nlohmann::json;

Construction::Construction(RotationVector alpha0, long N0, double eps0) {
  if (N0 < 4) throw PreconditionError("Construction: N0 must be at least 4");
  if (!(eps0 > 0.0 && eps0 < 0.5)) throw PreconditionError("Construction: eps0 must lie in (0, 1/2)");
  StageParams s;
  s.N = N0;
  s.eps = eps0;
  s.m = return_period(alpha0);
  s.alpha = std::move(alpha0);
  stages_.push_back(std::move(s));
}

ConjugacyStack Construction::stack(int n) const {
  if (n < 0 || n > last()) throw PreconditionError("Construction::stack: no stage " + std::to_string(n));
  return ConjugacyStack({shears_.begin(), shears_.begin() + n});
}

void Construction::push(long b, std::shared_ptr<const CircleMapPoly> theta, double theta_eps, StageParams next,
                        int table_log2) {
  auto& cur = stages_.back();
  auto h = std::make_shared<ShearMap>(cur.alpha, b, theta, table_log2);
  cur.b = b;
  cur.theta = std::move(theta);
  cur.theta_eps = theta_eps;
  next.n = cur.n + 1;
  next.m = return_period(next.alpha);
  next.b = 0;
  next.theta.reset();
  shears_.push_back(std::move(h));
  stages_.push_back(std::move(next));
}

RotationVector perturbed_alpha(const RotationVector& alpha, int n, long k) {
  if (k < 1) throw PreconditionError("perturbed_alpha: k must be positive");
  const BigInt scale = BigInt(k) << (n + 1);
  return RotationVector(alpha.p() * scale + 1, alpha.r() * scale + 1, alpha.q() * scale);
}

json to_json(const StageParams& s) {
  json j = {{"n", s.n},     {"N", s.N}, {"eps", s.eps}, {"alpha", to_json(s.alpha)},
            {"m", s.m},     {"b", s.b}, {"k", s.k},     {"theta_eps", s.theta_eps}};
  j["theta"] = s.theta ? to_json(*s.theta) : json(nullptr);
  return j;
}

StageParams stage_from_json(const json& j) {
  StageParams s;
  s.n = j.at("n").get<int>();
  s.N = j.at("N").get<long>();
  s.eps = j.at("eps").get<double>();
  s.alpha = rotation_from_json(j.at("alpha"));
  s.m = j.at("m").get<long>();
  s.b = j.at("b").get<long>();
  s.k = j.value("k", 0L);
  s.theta_eps = j.value("theta_eps", 0.0);
  if (j.contains("theta") && !j["theta"].is_null()) s.theta = std::make_shared<CircleMapPoly>(theta_from_json(j["theta"]));
  if (s.m != return_period(s.alpha)) throw IoError("stage " + std::to_string(s.n) + ": m does not match alpha");
  if (s.theta && s.theta->m != s.m) throw IoError("stage " + std::to_string(s.n) + ": theta has the wrong m");
  return s;
}

json to_json(const StepReport& r) {
  json reports = json::array();
  for (const auto& p : r.reports) reports.push_back(to_json(p));
  return {{"n", r.n}, {"verified", r.verified}, {"diagnostic", r.diagnostic}, {"reports", reports}, {"search", r.search}};
}

namespace {

// Largest error of Theta from rounding x to 64 bits; a tenth of the 1e-9 composition budget.
constexpr double kPhaseFloor = 1e-10;

std::string describe(const PropertyReport& r) {
  std::ostringstream s;
  s << r.id << " " << to_string(r.verdict);
  if (!r.counterexample.is_null()) s << " at " << r.counterexample.dump();
  return s.str();
}

class Clock {
 public:
  explicit Clock(double seconds) : limit_(seconds), start_(std::chrono::steady_clock::now()) {}
  void check(const std::string& property) const {
    const double used = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (used > limit_)
      throw BudgetError(property, "wall-clock budget of " + std::to_string(limit_) + " s exhausted during " + property);
  }

 private:
  double limit_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

StepReport choose_next_stage(Construction& run, const SearchOptions& opt) {
  const Clock clock(opt.budgets.seconds);
  const int n = run.last();
  const StageParams cur = run.stage(n);
  const StageOverride ov =
      static_cast<std::size_t>(n) < opt.schedule.size() ? opt.schedule[static_cast<std::size_t>(n)] : StageOverride{};
  const VerifyOptions& vo = opt.verify;
  StepReport out;
  out.n = n;
  out.diagnostic = !ov.empty();
  json search = json::object();

  // The cheapest rotation step must fit the denominator budget.
  if (!ov.k && perturbed_alpha(cur.alpha, n, 1).q() > opt.budgets.q_max)
    throw BudgetError("P2", "alpha search: q_" + std::to_string(n + 1) + " = " + perturbed_alpha(cur.alpha, n, 1).q().str() +
                                " already exceeds q_max = " + opt.budgets.q_max.str() + " at k = 1");

  // theta_n.
  const double theta_eps = ov.theta_eps ? *ov.theta_eps : 1.0 / (4.0 * static_cast<double>(cur.N));
  std::shared_ptr<const CircleMapPoly> theta;
  try {
    theta = std::make_shared<CircleMapPoly>(opt.theta_factory ? opt.theta_factory(theta_eps, cur.m)
                                                              : build_theta(theta_eps, cur.m, opt.theta));
  } catch (const BudgetError& e) {
    throw BudgetError("P1", "theta_" + std::to_string(n) + " at eps = " + std::to_string(theta_eps) + ": " + e.what());
  }
  search["theta"] = {{"eps", theta_eps}, {"m", cur.m}, {"degree", theta->degree()}, {"sup_error", theta->sup_error}};
  clock.check("P1");

  // N_{n+1}.
  PropertyReport claim;
  json n_tried = json::array();
  long N_next = 0;
  if (ov.N) {
    N_next = *ov.N;
    claim = verify_claim(*theta, cur.N, N_next, vo.claim_omegas);
    n_tried.push_back({{"N", N_next}, {"claim", to_string(claim.verdict)}});
  } else {
    for (long N = 2 * cur.N; N <= opt.budgets.N_max; N *= 2) {
      claim = verify_claim(*theta, cur.N, N, vo.claim_omegas);
      n_tried.push_back({{"N", N}, {"claim", to_string(claim.verdict)}});
      clock.check("P1");
      if (claim.pass()) {
        N_next = N;
        break;
      }
    }
    if (N_next == 0)
      throw BudgetError("P1", "claim: no N_" + std::to_string(n + 1) + " <= N_max = " +
                                  std::to_string(opt.budgets.N_max) + " gives a crooked chain; last " + describe(claim));
  }
  claim.n = n;
  search["N"] = n_tried;
  out.reports.push_back(claim);

  // b_{n+1} and eps_{n+1}, then Property 1.
  const double gap_bound = 1.0 / (8.0 * static_cast<double>(cur.N));
  const ConjugacyStack H = run.stack(n);
  std::shared_ptr<const ShearMap> shear;
  PropertyReport p1;
  double eps_next = 0.0;
  json b_tried = json::array();
  std::string last_failure = "no b tried";
  for (long b = ov.b ? *ov.b : 1; b <= (ov.b ? *ov.b : opt.budgets.b_max); b *= 2) {
    auto h = std::make_shared<ShearMap>(cur.alpha, b, theta, opt.table_log2);
    const double phase_error = std::ldexp(h->dtheta_dx(), -64);
    if (phase_error > kPhaseFloor && !ov.b)
      throw BudgetError("precision", "b = " + std::to_string(b) + " needs phase resolution " + std::to_string(phase_error) +
                                         " beyond 64-bit evaluation; last " + last_failure);
    auto gap_at = [&](double e) { return shear_image_gap(*h, N_next, e, vo.x_samples, vo.boundary_samples); };
    json entry = {{"b", b}, {"phase_error", phase_error}};
    std::optional<double> eps;
    double gap = 0.0;
    if (ov.eps) {
      gap = gap_at(*ov.eps);
      if (gap <= gap_bound || ov.b) eps = *ov.eps;
    } else {
      const double floor_gap = gap_at(cur.eps * std::ldexp(1.0, -opt.budgets.eps_halvings));
      entry["floor_gap"] = floor_gap;
      if (floor_gap <= gap_bound) {
        double e = cur.eps / 2;
        for (int k = 0; k < opt.budgets.eps_halvings; ++k, e /= 2) {
          gap = gap_at(e);
          if (gap <= gap_bound) {
            eps = e;
            break;
          }
        }
      }
      if (!eps && ov.b)
        throw BudgetError("P1", "eps_" + std::to_string(n + 1) + ": no eps within " +
                                    std::to_string(opt.budgets.eps_halvings) + " halvings meets the image gap at b = " +
                                    std::to_string(b));
    }
    entry["gap"] = gap;
    clock.check("P1");
    if (!eps) {
      b_tried.push_back(entry);
      last_failure = "image gap " + std::to_string(gap) + " > " + std::to_string(gap_bound) + " at b = " + std::to_string(b);
      continue;
    }
    entry["eps"] = *eps;
    p1 = verify_P1(H, *h, n, cur.N, cur.eps, N_next, *eps, vo);
    entry["P1"] = to_string(p1.verdict);
    b_tried.push_back(entry);
    clock.check("P1");
    if (p1.pass() || !ov.empty()) {
      shear = h;
      eps_next = *eps;
      break;
    }
    last_failure = describe(p1);
  }
  search["b"] = b_tried;
  if (!shear)
    throw BudgetError("P1", "no b_" + std::to_string(n + 1) + " <= b_max = " + std::to_string(opt.budgets.b_max) +
                                " passes; last " + last_failure);
  out.reports.push_back(p1);

  // alpha_{n+1}.
  const ConjugacyStack H_next = H.pushed(shear);
  std::optional<StageView> prev;
  if (n >= 1) prev = StageView{run.stack(n - 1), run.stage(n - 1).alpha};
  const StageView here{H, cur.alpha};
  json k_tried = json::array();
  PropertyReport p23, p45;
  std::optional<RotationVector> alpha_next;
  long k_next = 0;
  last_failure = "no k tried";
  for (long k = ov.k ? *ov.k : 1;; k *= 2) {
    const RotationVector a = perturbed_alpha(cur.alpha, n, k);
    if (!ov.k && a.q() > opt.budgets.q_max)
      throw BudgetError("P2-P5", "alpha search: q = " + a.q().str() + " exceeds q_max = " + opt.budgets.q_max.str() +
                                     " at k = " + std::to_string(k) + "; last " + last_failure);
    json entry = {{"k", k}, {"q", a.q().str()}};
    if (a.p() == 0) {
      entry["skipped"] = "p = 0";
      k_tried.push_back(entry);
      if (ov.k) throw PreconditionError("schedule: k gives an alpha with p = 0");
      continue;
    }
    p23 = verify_P2_P3(cur.alpha, a, n, H_next, vo);
    entry["P2-P3"] = to_string(p23.verdict);
    clock.check("P2-P5");
    if (p23.pass() || ov.k) {
      const StageView next{H_next, a};
      p45 = verify_P4_P5(prev ? &*prev : nullptr, here, next, n, vo);
      entry["P4-P5"] = to_string(p45.verdict);
      clock.check("P2-P5");
    }
    k_tried.push_back(entry);
    if (ov.k || (p23.pass() && p45.pass())) {
      alpha_next = a;
      k_next = k;
      break;
    }
    last_failure = p23.pass() ? describe(p45) : describe(p23);
  }
  search["k"] = k_tried;
  out.reports.push_back(p23);
  out.reports.push_back(p45);

  StageParams next;
  next.N = N_next;
  next.eps = eps_next;
  next.alpha = *alpha_next;
  next.k = k_next;
  run.push(shear->b(), theta, ov.theta_eps ? *ov.theta_eps : 0.0, std::move(next), opt.table_log2);
  out.reports.push_back(verify_semiconjugacy(run.stack(n + 1), run.stage(n + 1).alpha, n + 1, vo));

  out.verified = !out.diagnostic;
  for (const auto& r : out.reports) out.verified = out.verified && r.pass();
  out.search = search;
  return out;
}

}  // namespace pseudocircle
