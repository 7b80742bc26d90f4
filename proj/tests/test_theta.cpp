#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "crooked_oracle.hpp"
#include "pseudocircle/crooked.hpp"

using namespace pseudocircle;

namespace {

const CircleMapPoly& theta_for(double eps, long m) {
  static std::map<std::pair<double, long>, CircleMapPoly> cache;
  auto it = cache.find({eps, m});
  if (it == cache.end()) it = cache.emplace(std::pair{eps, m}, build_theta(eps, m)).first;
  return it->second;
}

}  // namespace

class ThetaShape : public ::testing::TestWithParam<std::pair<double, long>> {};

TEST_P(ThetaShape, EndpointAndRangeConditions) {
  const auto [eps, m] = GetParam();
  const auto& th = theta_for(eps, m);
  const double dm = static_cast<double>(m);
  const double d = th.delta_f;
  EXPECT_NEAR(eval_theta(th, 0.0), 0.0, d);
  EXPECT_NEAR(eval_theta(th, 1.0 / (2 * dm)), 2.0, d);
  EXPECT_NEAR(eval_theta(th, 1.0 / dm), 1.0 / dm, d);
  double lo1 = 1e9, hi1 = -1e9, lo2 = 1e9, hi2 = -1e9;
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    const double x = (0.5 / dm) * i / n;
    const double v1 = eval_theta(th, x), v2 = eval_theta(th, x + 0.5 / dm);
    lo1 = std::min(lo1, v1);
    hi1 = std::max(hi1, v1);
    lo2 = std::min(lo2, v2);
    hi2 = std::max(hi2, v2);
  }
  EXPECT_GE(lo1, -d);
  EXPECT_LE(hi1, 2.0 + d);
  EXPECT_GE(lo2, 1.0 / dm - d);
  EXPECT_LE(hi2, 2.0 + d);
  // Image of each half has length > 1, the quantity the chain argument uses.
  // For m = 1 the falling half covers [1, 2], which is exactly 1 before smoothing.
  EXPECT_GT(hi1 - lo1, 1.0);
  if (m >= 2) EXPECT_GT(hi2 - lo2, 1.0);
  else EXPECT_GT(hi2 - lo2, 1.0 - 2 * d);
  EXPECT_TRUE(th.rising.verified);
  EXPECT_TRUE(th.falling.verified);
  EXPECT_GT(th.rising.margin, 0.0);
  EXPECT_GT(th.falling.margin, 0.0);
}

TEST_P(ThetaShape, WithinDeltaOfPrototype) {
  const auto [eps, m] = GetParam();
  const auto& th = theta_for(eps, m);
  const double dm = static_cast<double>(m);
  const auto up = build_zigzag(eps, 0.0, 0.5 / dm, 0.0, 2.0);
  const auto down = build_zigzag(eps, 0.5 / dm, 1.0 / dm, 2.0, 1.0 / dm);
  double worst = 0.0;
  for (int i = 0; i <= 40000; ++i) {
    const double x = (1.0 / dm) * i / 40000;
    const double p = x <= 0.5 / dm ? up(x) : down(x);
    worst = std::max(worst, std::abs(eval_theta(th, x) - p));
  }
  EXPECT_LE(worst, th.delta_f);
  EXPECT_LE(th.sup_error, th.delta_f);
  EXPECT_LE(th.delta_f, eps / 10 * (1 + 1e-12));
}

TEST_P(ThetaShape, DegreeOneAndPeriodicity) {
  const auto [eps, m] = GetParam();
  const auto& th = theta_for(eps, m);
  const double dm = static_cast<double>(m);
  double defect = 0.0;
  for (int i = 0; i < 1024; ++i) {
    const double x = i / 1024.0;
    EXPECT_EQ(eval_theta(th, x + 1.0), eval_theta(th, x) + 1.0);
    defect = std::max(defect, std::abs((eval_theta(th, x + 1.0 / dm) - (x + 1.0 / dm)) - (eval_theta(th, x) - x)));
  }
  EXPECT_LT(defect, 1e-12 * th.lipschitz());
  for (long f : th.frequencies()) EXPECT_EQ(f % m, 0);
}

TEST_P(ThetaShape, SkeletonCertificateMatchesDenseSamples) {
  const auto [eps, m] = GetParam();
  const auto& th = theta_for(eps, m);
  if (th.degree() > 1000) GTEST_SKIP() << "dense oracle sized for low-degree theta";
  const double half = 0.5 / static_cast<double>(m);
  std::vector<double> xs, ys;
  const int n = 5000;
  for (int i = 0; i <= n; ++i) {
    xs.push_back(half * i / n);
    ys.push_back(eval_theta(th, xs.back()));
  }
  EXPECT_TRUE(pctest::grid_crooked(PiecewiseMonotone(xs, ys), eps, 1));
}

INSTANTIATE_TEST_SUITE_P(Theta, ThetaShape,
                         ::testing::Values(std::pair{1.0, 1L}, std::pair{1.0, 2L}, std::pair{1.0, 3L}, std::pair{0.5, 1L},
                                           std::pair{0.5, 2L}));

TEST(Theta, BandMatchesPointwise) {
  const auto& th = theta_for(0.5, 1);
  std::vector<double> xs;
  for (int i = -50; i < 50; ++i) xs.push_back(i * 0.0371);
  const auto band = eval_theta_band(th, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_EQ(band[i], eval_theta(th, xs[i]));
}

TEST(Theta, TableWithinBound) {
  const auto& th = theta_for(0.5, 2);
  const ThetaTable table(th);
  for (int i = 0; i < 5000; ++i) {
    const double x = -3.0 + i * 0.0013;
    EXPECT_NEAR(table(x), eval_theta(th, x), table.error_bound() + 1e-12);
  }
}

TEST(Theta, JsonRoundTrip) {
  const auto& th = theta_for(1.0, 2);
  const auto back = theta_from_json(nlohmann::json::parse(to_json(th).dump()));
  EXPECT_EQ(back.m, 2);
  EXPECT_EQ(back.degree(), th.degree());
  for (double x : {0.0, 0.1, 0.37, 0.9}) EXPECT_EQ(eval_theta(back, x), eval_theta(th, x));
  EXPECT_TRUE(back.rising.verified);
}

TEST(Theta, SixteenthNeedsMoreThanTheBudget) {
  // Span 2 at eps = 1/16 has no feasible prototype.
  try {
    build_theta(1.0 / 16, 1);
    FAIL() << "expected BudgetError";
  } catch (const BudgetError& e) {
    EXPECT_EQ(e.property(), "zigzag");
  }
}

TEST(Theta, FrequencyBudgetIsEnforced) {
  ThetaOptions opt;
  opt.max_frequencies = 100;
  try {
    build_theta(0.5, 1, opt);
    FAIL() << "expected BudgetError";
  } catch (const BudgetError& e) {
    EXPECT_EQ(e.property(), "theta");
  }
}

TEST(Theta, ReplayReproducesRecordAndCatchesMutation) {
  const auto& th = theta_for(1.0, 2);
  const auto replay = replay_theta(th);
  EXPECT_TRUE(replay.ok());
  EXPECT_EQ(replay.sup_error, th.sup_error);
  auto bad = th;
  bad.cos[3] += 1e-6;
  EXPECT_FALSE(replay_theta(bad).matches_record);
  bad.cos[3] += 0.5;
  const auto broken = replay_theta(bad);
  EXPECT_FALSE(broken.within_delta);
  EXPECT_FALSE(broken.ok());
}
