#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pseudocircle/run.hpp"

using namespace pseudocircle;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::path(::testing::TempDir()) / ("pcircle_" + name);
  fs::remove_all(d);
  return d;
}

// One cheap step: N = 4 with theta at eps = 1.
RunConfig small_config() {
  return run_config_from_json(json::parse(R"({
    "alpha0": {"p": "2", "r": "1", "q": "5"}, "N0": 4, "eps0": 0.2, "stages": 1,
    "verify": {"x_samples": 4, "boundary_samples": 64, "grid": 128, "iterate_grid": 16, "iterate_samples": 8,
               "density_seeds": 8},
    "schedule": [{"N": 4, "theta_eps": 1.0, "k": 2}]})"));
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

const LoadedRun& shared_run(fs::path* dir_out = nullptr) {
  static const fs::path dir = fresh_dir("shared");
  static const LoadedRun lr = [] {
    std::ostringstream log;
    build_run(small_config(), dir.string(), log);
    return load_run(dir.string());
  }();
  if (dir_out) *dir_out = dir;
  return lr;
}

}  // namespace

TEST(Config, RoundTripsEveryField) {
  RunConfig c = small_config();
  c.search.budgets.q_max = BigInt("123456789012345678901234567890");
  c.search.verify.seed = 77;
  const RunConfig back = run_config_from_json(json::parse(to_json(c).dump()));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.search.budgets.q_max, c.search.budgets.q_max);
  ASSERT_EQ(back.search.schedule.size(), 1u);
  EXPECT_EQ(*back.search.schedule[0].k, 2);
  EXPECT_FALSE(back.search.schedule[0].b.has_value());
}

TEST(Config, RejectsInvalidValues) {
  EXPECT_THROW(run_config_from_json(json{{"stages", 0}}), PreconditionError);
  EXPECT_THROW(run_config_from_json(json{{"N0", 3}}), PreconditionError);
  EXPECT_THROW(run_config_from_json(json{{"eps0", 0.5}}), PreconditionError);
  EXPECT_THROW(run_config_from_json(json{{"budgets", {{"q_max", "0"}}}}), PreconditionError);
  EXPECT_THROW(load_config((fresh_dir("nope") / "config.json").string()), IoError);
}

TEST(Properties, ParsesSubsetsAndRejectsUnknownNames) {
  EXPECT_EQ(parse_properties("semiconj,replay"), (std::set<std::string>{"semiconj", "replay"}));
  EXPECT_EQ(parse_properties("").size(), property_names().size());
  EXPECT_THROW(parse_properties("P1,P9"), PreconditionError);
}

TEST(ExitCodes, WorstVerdictWins) {
  PropertyReport pass, fail, maybe;
  fail.verdict = Verdict::fail;
  maybe.verdict = Verdict::inconclusive;
  EXPECT_EQ(exit_code({pass, pass}), kExitPass);
  EXPECT_EQ(exit_code({pass, maybe}), kExitInconclusive);
  EXPECT_EQ(exit_code({maybe, fail}), kExitFail);
}

TEST(Build, BudgetStopLeavesPartialMarker) {
  RunConfig c = small_config();
  c.search.schedule[0].k.reset();
  c.search.budgets.q_max = 1;
  const fs::path dir = fresh_dir("budget");
  std::ostringstream log;
  const auto out = build_run(c, dir.string(), log);
  EXPECT_EQ(out.exit, kExitBudget);
  ASSERT_TRUE(out.partial.has_value());
  EXPECT_NE(out.partial->find("P2"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "PARTIAL.json"));
  json summary;
  std::ifstream(dir / "summary.json") >> summary;
  EXPECT_EQ(summary["exit"], kExitBudget);
  EXPECT_FALSE(summary["partial"].is_null());
}

TEST(Build, PersistsAndReloads) {
  fs::path dir;
  const auto& lr = shared_run(&dir);
  for (const char* f : {"config.json", "stage_0.json", "stage_1.json", "report_0.json", "summary.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  ASSERT_EQ(lr.run.size(), 2u);
  EXPECT_EQ(lr.run.stage(1).alpha, perturbed_alpha(RotationVector(2, 1, 5), 0, 2));
  EXPECT_EQ(exit_code(verify_run(lr, parse_properties("semiconj,replay"))), kExitPass);
  const auto table = run_report(dir.string(), true);
  EXPECT_EQ(table.rfind("n,N_next", 0), 0u);
}

TEST(Load, NamesMissingAndCorruptFiles) {
  fs::path dir;
  shared_run(&dir);
  const fs::path copy = fresh_dir("corrupt");
  fs::copy(dir, copy, fs::copy_options::recursive);
  fs::remove(copy / "stage_1.json");
  EXPECT_NE(message_of([&] { load_run(copy.string()); }).find("stage_1.json"), std::string::npos);
  std::ofstream(copy / "stage_1.json") << "{\"n\": 1, \"alpha\": ";
  EXPECT_THROW(load_run(copy.string()), IoError);
  EXPECT_NE(message_of([&] { load_run(copy.string()); }).find("stage_1.json"), std::string::npos);
  EXPECT_THROW(load_run(fresh_dir("absent").string()), IoError);
}

TEST(Load, MutatedThetaCoefficientFailsReplay) {
  fs::path dir;
  shared_run(&dir);
  const fs::path copy = fresh_dir("mutated");
  fs::copy(dir, copy, fs::copy_options::recursive);
  json j;
  std::ifstream(copy / "stage_0.json") >> j;
  j["theta"]["sin"][2] = j["theta"]["sin"][2].get<double>() + 1e-6;
  std::ofstream(copy / "stage_0.json") << j.dump(1);
  const auto reports = verify_run(load_run(copy.string()), parse_properties("replay"));
  ASSERT_FALSE(reports.empty());
  EXPECT_NE(exit_code(reports), kExitPass);
}
