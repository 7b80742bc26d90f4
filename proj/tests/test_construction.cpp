#include <gtest/gtest.h>

#include "pseudocircle/construction.hpp"

using namespace pseudocircle;

namespace {

CircleMapPoly identity_theta(double eps, long m) {
  CircleMapPoly th;
  th.m = m;
  th.eps = eps;
  th.cos = {0.0};
  th.sin = {0.0};
  const double w = 1.0 / static_cast<double>(m);
  th.skeleton = PiecewiseMonotone({0.0, w}, {0.0, w});
  return th;
}

SearchOptions light_options() {
  SearchOptions opt;
  opt.verify.x_samples = 2;
  opt.verify.boundary_samples = 32;
  opt.verify.grid = 64;
  opt.verify.iterate_grid = 8;
  opt.verify.iterate_samples = 4;
  opt.verify.density_seeds = 4;
  opt.verify.birkhoff_iterates = 500;
  opt.verify.claim_omegas = 4;
  opt.table_log2 = 14;
  return opt;
}

SearchOptions diagnostic_options() {
  auto opt = light_options();
  StageOverride s;
  s.N = 4;
  s.theta_eps = 1.0;
  s.k = 2;
  opt.schedule = {s};
  return opt;
}

}  // namespace

TEST(Alpha, PerturbedStepIsExact) {
  const auto a = perturbed_alpha(RotationVector(2, 1, 5), 0, 1);
  EXPECT_EQ(a, RotationVector(5, 3, 10));
  const auto b = perturbed_alpha(RotationVector(2, 1, 5), 0, 2);
  EXPECT_EQ(b, RotationVector(9, 5, 20));
  const auto c = perturbed_alpha(RotationVector(9, 5, 20), 1, 3);
  EXPECT_EQ(c.x() - RotationVector(9, 5, 20).x(), BigRational(1, 3 * 20 * 4));
  EXPECT_THROW(perturbed_alpha(RotationVector(2, 1, 5), 0, 0), PreconditionError);
}

TEST(Construction, StageZeroIsTheRotation) {
  const Construction run(RotationVector(2, 1, 5), 8, 0.1);
  EXPECT_EQ(run.stage(0).m, 2);
  EXPECT_EQ(run.stack(0).size(), 0u);
  const Point z{0.3L, 0.7L};
  const Point w = run.f(0, z);
  EXPECT_NEAR(static_cast<double>(w.x), 0.7, 1e-15);
  EXPECT_NEAR(static_cast<double>(w.y), 0.9, 1e-15);
  EXPECT_NEAR(static_cast<double>(run.p(0, z)), 0.3, 1e-15);
}

TEST(Construction, RejectsBadInput) {
  EXPECT_THROW(Construction(RotationVector(0, 1, 5), 8, 0.1), PreconditionError);
  EXPECT_THROW(Construction(RotationVector(2, 1, 5), 2, 0.1), PreconditionError);
  EXPECT_THROW(Construction(RotationVector(2, 1, 5), 8, 0.0), PreconditionError);
}

TEST(Construction, StageJsonRoundTrip) {
  Construction run(RotationVector(2, 1, 5), 8, 0.1);
  auto th = std::make_shared<CircleMapPoly>(build_theta(1.0, 2));
  StageParams next;
  next.N = 16;
  next.eps = 1e-3;
  next.alpha = RotationVector(9, 5, 20);
  next.k = 2;
  run.push(4, th, 1.0, next, 12);
  const auto j = to_json(run.stage(0));
  const auto back = stage_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.b, 4);
  EXPECT_EQ(back.alpha, run.stage(0).alpha);
  ASSERT_TRUE(back.theta);
  EXPECT_EQ(back.theta->cos, th->cos);
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_EQ(run.stage(1).m, 9);
  EXPECT_EQ(run.stack(1).size(), 1u);

  auto bad = j;
  bad["m"] = 3;
  EXPECT_THROW(stage_from_json(bad), IoError);
}

TEST(Search, IdentityThetaIsRejectedAtPropertyOne) {
  Construction run(RotationVector(2, 1, 5), 8, 0.1);
  auto opt = light_options();
  opt.budgets.N_max = 1L << 8;
  opt.theta_factory = identity_theta;
  try {
    choose_next_stage(run, opt);
    FAIL() << "search accepted theta = Id";
  } catch (const BudgetError& e) {
    EXPECT_EQ(e.property(), "P1");
  }
  EXPECT_EQ(run.size(), 1u);
}

TEST(Search, DenominatorBudgetIsChecked) {
  Construction run(RotationVector(2, 1, 5), 8, 0.1);
  auto opt = light_options();
  opt.budgets.q_max = 1;
  try {
    choose_next_stage(run, opt);
    FAIL() << "q_max = 1 accepted";
  } catch (const BudgetError& e) {
    EXPECT_EQ(e.property(), "P2");
  }
}

TEST(Search, DiagnosticStepRecordsEveryProperty) {
  Construction run(RotationVector(2, 1, 5), 4, 0.2);
  const auto rep = choose_next_stage(run, diagnostic_options());
  ASSERT_EQ(run.size(), 2u);
  EXPECT_TRUE(rep.diagnostic);
  EXPECT_FALSE(rep.verified);
  std::vector<std::string> ids;
  for (const auto& r : rep.reports) ids.push_back(r.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"claim", "P1", "P2-P3", "P4-P5", "semiconj"}));
  EXPECT_TRUE(rep.reports.back().pass()) << to_json(rep.reports.back()).dump();
  EXPECT_EQ(run.stage(1).alpha, RotationVector(9, 5, 20));
  EXPECT_EQ(run.stage(0).b, rep.search["b"].back()["b"].get<long>());
  // The chosen b keeps h^{-1} within 1/(8 N_0) of the vertical model.
  EXPECT_LE(rep.search["b"].back()["gap"].get<double>(), 1.0 / 32);
}

TEST(Search, IsDeterministic) {
  Construction a(RotationVector(2, 1, 5), 4, 0.2), b(RotationVector(2, 1, 5), 4, 0.2);
  const auto ra = choose_next_stage(a, diagnostic_options());
  const auto rb = choose_next_stage(b, diagnostic_options());
  EXPECT_EQ(to_json(ra).dump(), to_json(rb).dump());
  EXPECT_EQ(to_json(a.stage(1)).dump(), to_json(b.stage(1)).dump());
  EXPECT_EQ(to_json(a.stage(0)).dump(), to_json(b.stage(0)).dump());
}
