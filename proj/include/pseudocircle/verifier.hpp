#pragma once

// Sampled checks of the inductive properties of a built run, with verdicts
// pass / fail / inconclusive and the measured values behind them.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pseudocircle/ak.hpp"
#include "pseudocircle/chain.hpp"

namespace pseudocircle {

enum class Verdict { pass, inconclusive, fail };

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);
/// The worse of the two.
Verdict combine(Verdict a, Verdict b);

struct PropertyReport {
  std::string id;
  int n = 0;
  Verdict verdict = Verdict::pass;
  nlohmann::json measured = nlohmann::json::object();
  nlohmann::json counterexample = nullptr;
  nlohmann::json sampling = nlohmann::json::object();
  std::string note;

  bool pass() const { return verdict == Verdict::pass; }
};

nlohmann::json to_json(const PropertyReport& r);
PropertyReport report_from_json(const nlohmann::json& j);
std::string text_table(const std::vector<PropertyReport>& reports);

struct VerifyOptions {
  int x_samples = 16;
  /// Sample points on the boundary of each rectangle.
  int boundary_samples = 4096;
  int claim_omegas = 16;
  int grid = 512;
  /// Grid and number of sampled iterates for d0(f_{n+1}^i, f_n^i).
  int iterate_grid = 64;
  int iterate_samples = 64;
  int density_seeds = 64;
  long density_points = 1L << 14;
  int density_probe = 128;
  int birkhoff_seeds = 20;
  long birkhoff_iterates = 10000;
  /// eta_n = 1 / (eta_C q_n^2).
  double eta_C = 100.0;
  std::uint64_t seed = 1;
};

nlohmann::json to_json(const VerifyOptions& o);
VerifyOptions verify_options_from_json(const nlohmann::json& j, VerifyOptions base = {});

/// Deterministic uniform points of [0, 1)^2.
std::vector<Point> sample_points(std::uint64_t seed, std::size_t count);

/// Image of the lifted interval [a, b] under theta, as an interval enlarged by
/// the skeleton and table tolerances.
CircleInterval theta_image(const CircleMapPoly& theta, const ThetaTable& table, double a, double b);

/// The chain {theta(B - omega) + omega : B in B(N_inner)} against B(N_outer),
/// for omega = k / omegas: containment, crookedness and interval lengths < 1/(2 N_outer).
PropertyReport verify_claim(const CircleMapPoly& theta, long N_outer, long N_inner, int omegas);

/// Largest distance from h^{-1}(x', y) to (x, theta(y - omega_x) + omega_x) over sampled
/// (x', y) in (x - e, x + e) x B, sampled x and all B in B(N_inner). Bounds the Hausdorff
/// distance from h^{-1}((x - e, x + e) x B) to {x} x (theta(B - omega_x) + omega_x).
double shear_image_gap(const ShearMap& h, long N_inner, double eps_inner, int x_samples, int boundary_samples);

/// Property 1 for the step n -> n + 1: D_{n+1,x} crooked inside D_{n,x},
/// A_{n+1,x} inside A_{n,x}, and element diameters < 1/(n + 1).
PropertyReport verify_P1(const ConjugacyStack& H_n, const ShearMap& h_next, int n, long N_n, double eps_n,
                         long N_next, double eps_next, const VerifyOptions& opt);

/// Exact covering radius of the orbit {k alpha mod 1}.
Real orbit_covering_radius(const RotationVector& alpha);

/// Properties 2 and 3 for the step n -> n + 1.
PropertyReport verify_P2_P3(const RotationVector& alpha_n, const RotationVector& alpha_next, int n,
                            const ConjugacyStack& H_next, const VerifyOptions& opt);

struct StageView {
  ConjugacyStack H;
  RotationVector alpha;
};

/// Properties 4 and 5 for the step n -> n + 1; `prev` is stage n - 1 when n >= 1.
PropertyReport verify_P4_P5(const StageView* prev, const StageView& cur, const StageView& next, int n,
                            const VerifyOptions& opt);

/// Bing / Fearnley hypotheses over the P1 reports of consecutive steps.
PropertyReport verify_BF(const std::vector<PropertyReport>& p1_reports, const std::vector<long>& N,
                         const std::vector<double>& eps, const VerifyOptions& opt);

/// p o f - R_{p/q} o p on a grid, and f^q = id by genuine iteration.
PropertyReport verify_semiconjugacy(const ConjugacyStack& H, const RotationVector& alpha, int n,
                                    const VerifyOptions& opt, long iteration_points = 1000);

struct DeviationRow {
  long k = 0;
  double value = 0.0;
};

/// max over seeds of |<F^k(z) - z - k alpha, v>| on the lift, for each k.
std::vector<DeviationRow> estimate_deviations(const ConjugacyStack& H, const RotationVector& alpha,
                                              std::array<long, 2> v, const std::vector<long>& ks,
                                              const std::vector<Point>& seeds);

/// sup over a grid of |p_lift(z) - x|.
double p_oscillation(const ConjugacyStack& H, int grid);

/// Iterate indices 1..limit: all of the first `dense`, then `spread` more up to limit.
std::vector<long> iterate_sample(long limit, long dense, long spread);

}  // namespace pseudocircle
