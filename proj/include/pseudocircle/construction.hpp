#pragma once

// Stage records of the inductive construction, their persistence, and the
// stage-by-stage parameter search.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pseudocircle/ak.hpp"
#include "pseudocircle/verifier.hpp"

namespace pseudocircle {

/// Data of stage n. b and theta describe h_{n+1}; they stay unset (b = 0,
/// theta null) until stage n + 1 exists.
struct StageParams {
  int n = 0;
  long N = 0;
  double eps = 0.0;
  RotationVector alpha;
  long m = 0;
  long b = 0;
  std::shared_ptr<const CircleMapPoly> theta;
  /// alpha_n = alpha_{n-1} + (1, 1) / (k q_{n-1} 2^n); 0 for stage 0.
  long k = 0;
  /// eps used for theta_n when it differs from 1/(4 N_n).
  double theta_eps = 0.0;
};

/// Stages 0..n with H_n assembled from the shears h_1..h_n.
class Construction {
 public:
  Construction(RotationVector alpha0, long N0, double eps0);

  std::size_t size() const { return stages_.size(); }
  int last() const { return static_cast<int>(stages_.size()) - 1; }
  const StageParams& stage(int n) const { return stages_.at(static_cast<std::size_t>(n)); }
  const std::vector<StageParams>& stages() const { return stages_; }
  /// h_{n+1}.
  std::shared_ptr<const ShearMap> shear(int n) const { return shears_.at(static_cast<std::size_t>(n)); }
  /// H_n.
  ConjugacyStack stack(int n) const;

  Point f(int n, Point z) const { return stack(n).f(stage(n).alpha, z); }
  Real p(int n, Point z) const { return stack(n).p(z); }

  /// Appends stage n + 1, filling b and theta of the current last stage.
  void push(long b, std::shared_ptr<const CircleMapPoly> theta, double theta_eps, StageParams next, int table_log2 = 20);

 private:
  std::vector<StageParams> stages_;
  std::vector<std::shared_ptr<const ShearMap>> shears_;
};

/// New rotation vector alpha + (1, 1) / (k q 2^(n+1)).
RotationVector perturbed_alpha(const RotationVector& alpha, int n, long k);

nlohmann::json to_json(const StageParams& s);
/// theta is read from its own field; the caller shares it with the construction.
StageParams stage_from_json(const nlohmann::json& j);

struct Budgets {
  long N_max = 1L << 14;
  long b_max = 1L << 20;
  BigInt q_max = 1000000;
  double seconds = 1800.0;
  int eps_halvings = 40;
};

/// Per-stage fixed choices. Anything left empty is searched for.
struct StageOverride {
  std::optional<long> N;
  std::optional<long> b;
  std::optional<double> eps;
  std::optional<long> k;
  std::optional<double> theta_eps;
  bool empty() const { return !N && !b && !eps && !k && !theta_eps; }
};

struct SearchOptions {
  Budgets budgets;
  VerifyOptions verify;
  ThetaOptions theta;
  /// schedule[n] applies to the step n -> n + 1.
  std::vector<StageOverride> schedule;
  int table_log2 = 20;
  /// Replaces build_theta(eps, m, theta) when set.
  std::function<CircleMapPoly(double eps, long m)> theta_factory;
};

struct StepReport {
  int n = 0;
  /// True when every choice came from the search and every property passed.
  bool verified = false;
  bool diagnostic = false;
  std::vector<PropertyReport> reports;
  nlohmann::json search;
};

nlohmann::json to_json(const StepReport& r);

/// Builds stage n + 1 from the last stage of `run` and appends it.
/// Searched quantities that cannot be found within budget raise BudgetError
/// naming the property and the last failing measurement. When the schedule
/// fixes a choice, failing properties are recorded in the report instead.
StepReport choose_next_stage(Construction& run, const SearchOptions& opt);

}  // namespace pseudocircle
