#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "pseudocircle/verifier.hpp"

using namespace pseudocircle;

namespace {

// theta = Id on the circle, with the given m.
std::shared_ptr<CircleMapPoly> identity_theta(long m) {
  auto th = std::make_shared<CircleMapPoly>();
  th->m = m;
  th->cos = {0.0};
  th->sin = {0.0};
  const double w = 1.0 / static_cast<double>(m);
  th->skeleton = PiecewiseMonotone({0.0, w}, {0.0, w});
  return th;
}

// Covering radius of {k alpha} by brute force on a grid: the value at the
// worst grid point, and the slack of the grid.
std::pair<double, double> brute_covering(const RotationVector& a, int grid) {
  std::vector<Point> orbit;
  for (long k = 0; k < static_cast<long>(a.q()); ++k) orbit.push_back(a.multiple(k));
  double worst = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const Point c{(i + 0.5L) / grid, (j + 0.5L) / grid};
      double best = 1.0;
      for (const auto& p : orbit) best = std::min(best, static_cast<double>(torus_dist(c, p)));
      worst = std::max(worst, best);
    }
  return {worst, std::sqrt(0.5) / grid};
}

}  // namespace

TEST(Verdict, CombineKeepsTheWorst) {
  EXPECT_EQ(combine(Verdict::pass, Verdict::inconclusive), Verdict::inconclusive);
  EXPECT_EQ(combine(Verdict::fail, Verdict::inconclusive), Verdict::fail);
  EXPECT_EQ(combine(Verdict::pass, Verdict::pass), Verdict::pass);
  for (auto v : {Verdict::pass, Verdict::inconclusive, Verdict::fail}) EXPECT_EQ(verdict_from_string(to_string(v)), v);
}

TEST(Verdict, ReportJsonRoundTrip) {
  PropertyReport r;
  r.id = "P1";
  r.n = 2;
  r.verdict = Verdict::inconclusive;
  r.measured = {{"max_diameter", 0.125}};
  r.note = "x";
  const auto back = report_from_json(to_json(r));
  EXPECT_EQ(back.id, "P1");
  EXPECT_EQ(back.n, 2);
  EXPECT_EQ(back.verdict, Verdict::inconclusive);
  EXPECT_EQ(back.measured, r.measured);
  EXPECT_NE(text_table({r}).find("inconclusive"), std::string::npos);
}

TEST(Verdict, OptionsJsonRoundTrip) {
  VerifyOptions o;
  o.grid = 33;
  o.eta_C = 7.5;
  const auto back = verify_options_from_json(to_json(o));
  EXPECT_EQ(back.grid, 33);
  EXPECT_DOUBLE_EQ(back.eta_C, 7.5);
  EXPECT_THROW(verify_options_from_json({{"grid", 0}}), PreconditionError);
}

TEST(Sampling, PointsAreDeterministicAndInRange) {
  const auto a = sample_points(5, 100), b = sample_points(5, 100), c = sample_points(6, 100);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    EXPECT_GE(a[i].x, 0);
    EXPECT_LT(a[i].y, 1);
  }
  EXPECT_NE(a[0].x, c[0].x);
}

TEST(Sampling, IterateIndices) {
  EXPECT_EQ(iterate_sample(5, 16, 8), (std::vector<long>{1, 2, 3, 4, 5}));
  const auto s = iterate_sample(1000, 16, 10);
  EXPECT_EQ(s.front(), 1);
  EXPECT_EQ(s.back(), 1000);
  EXPECT_EQ(s[15], 16);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
}

TEST(Covering, MatchesBruteForce) {
  for (const auto& a : {RotationVector(2, 1, 5), RotationVector(1, 1, 3), RotationVector(3, 5, 7),
                        RotationVector(4, 6, 12), RotationVector(7, 3, 20), RotationVector(0, 1, 4)}) {
    const auto [worst, slack] = brute_covering(a, 200);
    const double R = static_cast<double>(orbit_covering_radius(a));
    EXPECT_LE(worst, R + 1e-12) << a.str();
    EXPECT_GE(worst + slack, R) << a.str();
  }
}

TEST(Covering, TwoFifthsOneFifth) {
  const double R = static_cast<double>(orbit_covering_radius(RotationVector(2, 1, 5)));
  const auto [worst, slack] = brute_covering(RotationVector(2, 1, 5), 500);
  EXPECT_NEAR(R, worst, slack);
}

TEST(Claim, IdentityThetaIsNotCrooked) {
  const auto th = identity_theta(1);
  const auto r = verify_claim(*th, 16, 64, 4);
  EXPECT_EQ(r.verdict, Verdict::fail);
  EXPECT_FALSE(r.counterexample.is_null());
}

TEST(ThetaImage, IdentityGivesTheInterval) {
  const auto th = identity_theta(3);
  const ThetaTable table(*th, 12);
  const auto iv = theta_image(*th, table, 0.1, 0.7);
  EXPECT_NEAR(iv.lo, 0.1, 1e-9);
  EXPECT_NEAR(iv.hi, 0.7, 1e-9);
}

TEST(P1, IdentityShearIsNotCrooked) {
  const RotationVector a(2, 1, 5);
  const auto h = std::make_shared<ShearMap>(a, 1, identity_theta(2));
  VerifyOptions opt;
  opt.x_samples = 2;
  opt.boundary_samples = 64;
  const auto r = verify_P1(ConjugacyStack(), *h, 0, 16, 0.25, 64, 0.1, opt);
  EXPECT_EQ(r.verdict, Verdict::fail);
  EXPECT_EQ(r.measured["crooked"], "fail");
  EXPECT_EQ(r.measured["containment"], "pass");
}

TEST(P2P3, UnchangedAlphaFails) {
  const RotationVector a(2, 1, 5);
  VerifyOptions opt;
  opt.density_seeds = 4;
  const auto r = verify_P2_P3(a, a, 0, ConjugacyStack(), opt);
  EXPECT_EQ(r.verdict, Verdict::fail);
  EXPECT_FALSE(r.measured["distinct"].get<bool>());
}

TEST(P2P3, RotationStepPasses) {
  const RotationVector a0(2, 1, 5), a1(41, 21, 100);
  VerifyOptions opt;
  opt.density_seeds = 4;
  const auto r = verify_P2_P3(a0, a1, 0, ConjugacyStack(), opt);
  EXPECT_EQ(r.verdict, Verdict::pass) << r.measured.dump();
}

TEST(P4P5, IdenticalStagesHaveZeroDistance) {
  const RotationVector a(2, 1, 5);
  const auto h = std::make_shared<ShearMap>(a, 4, identity_theta(2));
  const StageView s{ConjugacyStack({h}), a};
  VerifyOptions opt;
  opt.grid = 32;
  opt.iterate_grid = 8;
  opt.birkhoff_iterates = 200;
  const auto r = verify_P4_P5(nullptr, s, s, 0, opt);
  EXPECT_EQ(r.verdict, Verdict::pass) << r.measured.dump();
  EXPECT_EQ(r.measured["d0_f"].get<double>(), 0.0);
  EXPECT_EQ(r.measured["p_distance"].get<double>(), 0.0);
}

TEST(Semiconjugacy, RotationPasses) {
  VerifyOptions opt;
  opt.grid = 32;
  const auto r = verify_semiconjugacy(ConjugacyStack(), RotationVector(3, 2, 7), 0, opt, 50);
  EXPECT_EQ(r.verdict, Verdict::pass) << r.measured.dump();
}

TEST(Deviation, ZeroIterateIsZero) {
  const RotationVector a(2, 1, 5);
  const auto h = std::make_shared<ShearMap>(a, 1, identity_theta(2));
  const auto rows = estimate_deviations(ConjugacyStack({h}), a, {0, 1}, {0, 1, 7}, sample_points(3, 10));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].value, 0.0);
  EXPECT_LT(rows[2].value, 1e-12);
  EXPECT_LT(p_oscillation(ConjugacyStack({h}), 16), 1e-12);
}
