#pragma once

// Run configuration and run directories: build, reload, verify, report and
// render persisted runs.

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pseudocircle/construction.hpp"

namespace pseudocircle {

struct RunConfig {
  RotationVector alpha0{2, 1, 5};
  long N0 = 8;
  double eps0 = 0.1;
  /// Number of steps n -> n + 1 to build.
  int stages = 1;
  SearchOptions search;
};

nlohmann::json to_json(const ThetaOptions& o);
ThetaOptions theta_options_from_json(const nlohmann::json& j, ThetaOptions base = {});
nlohmann::json to_json(const StageOverride& o);
StageOverride stage_override_from_json(const nlohmann::json& j);
/// Every field, defaults included.
nlohmann::json to_json(const RunConfig& c);
/// Missing fields take their defaults; invalid values raise PreconditionError.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitInconclusive = 2, kExitBudget = 3 };
int exit_code(const std::vector<PropertyReport>& reports);

/// Property ids accepted by verify_run; P2/P3 and P4/P5 share a report.
const std::vector<std::string>& property_names();
std::set<std::string> parse_properties(const std::string& list);

struct BuildOutcome {
  std::vector<PropertyReport> reports;
  /// Set when a budget stopped the run; the directory then holds a PARTIAL marker.
  std::optional<std::string> partial;
  int exit = kExitPass;
};

/// Runs the search for config.stages steps, writing config.json, stage_n.json,
/// report_n.json and summary.json into dir.
BuildOutcome build_run(const RunConfig& config, const std::string& dir, std::ostream& log);

struct LoadedRun {
  RunConfig config;
  Construction run;
};

/// Rebuilds the construction from persisted files only.
LoadedRun load_run(const std::string& dir);

/// Theta certificate replay for every stored theta_n.
std::vector<PropertyReport> replay_reports(const LoadedRun& r);

/// Recomputes the selected properties from a loaded run.
std::vector<PropertyReport> verify_run(const LoadedRun& r, const std::set<std::string>& props);

/// One row per step from the stored reports; CSV or aligned text.
std::string run_report(const std::string& dir, bool csv);

/// Writes {dir}/stage_{n}/{kind}_{x}.ppm and returns its path.
std::string render_run(const std::string& dir, const LoadedRun& r, const std::string& kind, double x, int resolution,
                       std::optional<int> stage, std::ostream& log);

}  // namespace pseudocircle
