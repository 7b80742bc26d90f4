// Acceptance run: one PASS/FAIL line per criterion. The exit status is 0 when
// every criterion was evaluated, whatever the verdicts; 1 on an unexpected error.
//
// usage: acceptance <pcircle binary> <diagnostic config> [work dir]

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "crooked_oracle.hpp"
#include "oracles.hpp"
#include "pseudocircle/render.hpp"
#include "pseudocircle/run.hpp"

using namespace pseudocircle;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

int failures = 0;

void criterion(int id, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const BudgetError& e) {
    o = {false, "budget exhausted (" + e.property() + "): " + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_seconds > 0 && s > limit_seconds) {
    o.pass = false;
    o.detail += "; runtime " + fmt(s) + " s over " + fmt(limit_seconds) + " s";
  }
  if (!o.pass) ++failures;
  std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  [" << fmt(s) << " s] " << o.detail
            << std::endl;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

/// Names of files that differ between two directory trees.
std::vector<std::string> tree_diff(const fs::path& a, const fs::path& b) {
  std::vector<std::string> out;
  std::set<std::string> names;
  for (const auto& root : {a, b})
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) names.insert(fs::relative(e.path(), root).string());
  for (const auto& n : names)
    if (!fs::exists(a / n) || !fs::exists(b / n) || slurp(a / n) != slurp(b / n)) out.push_back(n);
  return out;
}

int run_exit(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome crooked_engine() {
  std::mt19937_64 rng(20240611);
  int agree = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const long n_out = std::uniform_int_distribution<long>(4, 10)(rng);
    const long n_in = std::uniform_int_distribution<long>(n_out, 64)(rng);
    const ChainMap map(pctest::random_walk_lhat(rng, n_in, n_out), n_out);
    if (is_crooked_inside(map).crooked == pctest::brute_force_crooked(map)) ++agree;
  }
  std::string detail = "oracle agreement " + std::to_string(agree) + "/200";
  if (agree != 200) return {false, detail};
  // The claim chains need theta at eps = 1/(4 N0).
  const long N0 = 8;
  const RotationVector alpha0(2, 1, 5);
  try {
    const auto theta = build_theta(1.0 / (4 * N0), return_period(alpha0));
    for (long N1 = 2 * N0; N1 <= (1L << 16); N1 *= 2) {
      const auto rep = verify_claim(theta, N0, N1, 16);
      if (rep.pass()) return {true, detail + "; claim certified at N0 = 8, N1 = " + std::to_string(N1)};
    }
    return {false, detail + "; claim not certified for N1 up to 2^16"};
  } catch (const BudgetError& e) {
    return {false, detail + "; claim chains need theta at eps = 1/32: " + e.what()};
  }
}

Outcome theta_certification() {
  const double eps = 1.0 / 32;
  const long m = 2;
  CircleMapPoly th;
  try {
    th = build_theta(eps, m);
  } catch (const BudgetError& e) {
    return {false, std::string("build_theta(1/32, 2): ") + e.what()};
  }
  const double d = eps / 10, dm = static_cast<double>(m);
  bool ok = th.delta_f <= d * (1 + 1e-12);
  ok = ok && std::abs(eval_theta(th, 0.0)) <= d && std::abs(eval_theta(th, 1 / (2 * dm)) - 2) <= d;
  double defect = 0;
  for (int i = 0; i < 1000; ++i) {
    const double x = i / 1000.0;
    defect = std::max(defect, std::abs(eval_theta(th, x + 1) - eval_theta(th, x) - 1));
    defect = std::max(defect, std::abs((eval_theta(th, x + 1 / dm) - x - 1 / dm) - (eval_theta(th, x) - x)));
  }
  ok = ok && defect <= 1e-12;
  const auto replay = replay_theta(th);
  const bool dense = pctest::grid_crooked(th.skeleton, eps);
  return {ok && replay.ok() && dense, "degree " + std::to_string(th.degree()) + ", defect " + fmt(defect) +
                                          ", replay " + (replay.ok() ? "ok" : "failed") + ", dense oracle " +
                                          (dense ? "ok" : "failed")};
}

Outcome shear_algebra() {
  const RotationVector a(2, 1, 5);
  const long b = 13;
  const auto theta = std::make_shared<CircleMapPoly>(build_theta(1.0, return_period(a)));
  const ShearMap h(a, b, theta);
  const ShearMap smooth(a, b, theta, 0);
  const Point al = a.as_point();
  double flow_gap = 0, round_trip = 0, commute = 0;
  const int n = 512;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Point z{(i + 0.5L) / n, (j + 0.5L) / n};
      const Point hz = h.forward(z);
      flow_gap = std::max({flow_gap, static_cast<double>(torus_dist(hz, h.forward_via_flow(z))),
                           static_cast<double>(torus_dist(h.inverse(z), h.inverse_via_flow(z)))});
      round_trip = std::max({round_trip, static_cast<double>(torus_dist(h.inverse(hz), z)),
                             static_cast<double>(torus_dist(h.forward(h.inverse(z)), z))});
      commute = std::max(commute, static_cast<double>(torus_dist(h.forward(wrap({z.x + al.x, z.y + al.y})),
                                                                 wrap({hz.x + al.x, hz.y + al.y}))));
    }
  // Five-point central differences on dyadic points, steps scaled to the phase slope.
  const int ex = static_cast<int>(msb(smooth.slope_integer())) + 13, ey = static_cast<int>(msb(BigInt(smooth.m()))) + 13;
  const Real dx = std::ldexp(1.0L, -ex), dy = std::ldexp(1.0L, -ey);
  auto deriv = [&](Point z, Real hx, Real hy) {
    const Point p2 = smooth.forward_lift({z.x + 2 * hx, z.y + 2 * hy}), p1 = smooth.forward_lift({z.x + hx, z.y + hy});
    const Point m1 = smooth.forward_lift({z.x - hx, z.y - hy}), m2 = smooth.forward_lift({z.x - 2 * hx, z.y - 2 * hy});
    const Real s = hx + hy;
    return Point{(-p2.x + 8 * p1.x - 8 * m1.x + m2.x) / (12 * s), (-p2.y + 8 * p1.y - 8 * m1.y + m2.y) / (12 * s)};
  };
  double det_err = 0;
  for (const Point& r : sample_points(3, 10000)) {
    const Point z{std::ldexp(std::floor(std::ldexp(r.x, 30)), -30), std::ldexp(std::floor(std::ldexp(r.y, 30)), -30)};
    const Point gx = deriv(z, dx, 0), gy = deriv(z, 0, dy);
    det_err = std::max(det_err, std::abs(static_cast<double>(gx.x * gy.y - gy.x * gx.y) - 1.0));
  }
  const bool ok = flow_gap <= 1e-12 && round_trip <= 1e-9 && commute <= 1e-9 && det_err <= 1e-5;
  return {ok, "flow vs closed form " + fmt(flow_gap) + ", round trip " + fmt(round_trip) + ", rotation " + fmt(commute) +
                  ", |det - 1| " + fmt(det_err)};
}

Outcome return_period_oracle() {
  std::mt19937_64 rng(11);
  int agree = 0;
  for (int t = 0; t < 50; ++t) {
    const long q = std::uniform_int_distribution<long>(2, 100)(rng);
    const long p = std::uniform_int_distribution<long>(1, q - 1)(rng);
    const long r = std::uniform_int_distribution<long>(0, q - 1)(rng);
    const RotationVector a(p, r, q);
    if (return_period(a) == pctest::simulated_return(a, 1) && return_period(a) == pctest::simulated_return(a, 13))
      ++agree;
  }
  return {agree == 50, "agreement " + std::to_string(agree) + "/50 for b in {1, 13}"};
}

std::string diagnostic_schedule(const std::vector<PropertyReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    if (r.id == "P1")
      out += "; diagnostic D_" + std::to_string(r.n + 1) + " diameter " + fmt(r.measured.value("max_diameter", -1.0)) +
             " vs < 1/" + std::to_string(r.n + 2);
    if (r.id == "P4-P5")
      out += "; p-distance " + fmt(r.measured.value("p_distance", -1.0)) + " vs < 2^-" + std::to_string(r.n);
  }
  return out;
}

Outcome end_to_end(const std::vector<PropertyReport>& diagnostic) {
  const std::string schedule = diagnostic_schedule(diagnostic);
  Construction run(RotationVector(2, 1, 5), 8, 0.1);
  SearchOptions opt;
  std::vector<PropertyReport> reports;
  try {
    for (int step = 0; step < 2; ++step) {
      const auto rep = choose_next_stage(run, opt);
      reports.insert(reports.end(), rep.reports.begin(), rep.reports.end());
    }
  } catch (const BudgetError& e) {
    return {false, "N0 = 8 search stopped (" + e.property() + "): " + e.what() + schedule};
  }
  std::vector<PropertyReport> p1;
  std::vector<long> N;
  std::vector<double> eps;
  for (const auto& s : run.stages()) {
    N.push_back(s.N);
    eps.push_back(s.eps);
  }
  for (const auto& r : reports)
    if (r.id == "P1") p1.push_back(r);
  reports.push_back(verify_BF(p1, N, eps, opt.verify));
  bool ok = true;
  for (const auto& r : reports) ok = ok && r.pass();
  for (std::size_t i = 0; i < p1.size(); ++i) ok = ok && p1[i].measured.value("max_diameter", 1e9) < 1.0 / (i + 2);
  for (const auto& r : reports)
    if (r.id == "P4-P5") ok = ok && r.measured.value("p_distance", 1e9) < std::ldexp(1.0, -r.n);
  return {ok, "N0 = 8 run built" + diagnostic_schedule(reports)};
}

Outcome semiconjugacy(const LoadedRun& lr) {
  VerifyOptions opt = lr.config.search.verify;
  opt.grid = 512;
  bool ok = true;
  std::string detail;
  for (int n = 0; n <= lr.run.last(); ++n) {
    const auto rep = verify_semiconjugacy(lr.run.stack(n), lr.run.stage(n).alpha, n, opt, 1000);
    ok = ok && rep.pass();
    detail += (n ? ", " : "") + std::string("stage ") + std::to_string(n) + " " + to_string(rep.verdict);
  }
  return {ok, detail};
}

Outcome deviations(const LoadedRun& lr) {
  const int n = lr.run.last();
  const auto H = lr.run.stack(n);
  const auto& alpha = lr.run.stage(n).alpha;
  const long q1 = lr.run.stage(1).alpha.q().convert_to<long>();
  std::vector<long> ks;
  for (long k = 0; k <= q1; ++k) ks.push_back(k);
  const auto seeds = sample_points(9, 64);
  auto worst = [&](std::array<long, 2> v) {
    double m = 0;
    for (const auto& row : estimate_deviations(H, alpha, v, ks, seeds)) m = std::max(m, row.value);
    return m;
  };
  const double bound = 1 + p_oscillation(H, 512);
  const double dx = worst({1, 0}), dy = worst({0, 1});
  return {dx <= bound && dy > bound, "k <= " + std::to_string(q1) + ": v = (1,0) " + fmt(dx) + ", v = (0,1) " + fmt(dy) +
                                         ", 1 + p-oscillation " + fmt(bound)};
}

void render_all(const fs::path& dir) {
  const auto lr = load_run(dir.string());
  std::ostringstream log;
  for (const std::string kind : {"leaf", "chains", "orbit"}) render_run(dir.string(), lr, kind, 0.25, 256, {}, log);
}

Outcome determinism(const fs::path& first, const RunConfig& config, const fs::path& work, const std::string& pcircle) {
  const fs::path second = work / "run_b";
  std::ostringstream log;
  build_run(config, second.string(), log);
  render_all(first);
  render_all(second);
  const auto diff = tree_diff(first, second);
  std::string detail = diff.empty() ? "rebuild and PPMs byte-identical" : "differs: " + diff.front();
  const fs::path mutated = work / "run_mutated";
  fs::remove_all(mutated);
  fs::copy(first, mutated, fs::copy_options::recursive);
  const fs::path stage = mutated / "stage_0.json";
  auto j = nlohmann::json::parse(slurp(stage));
  j["theta"]["cos"][1] = j["theta"]["cos"][1].get<double>() + 1e-3;
  std::ofstream(stage) << j.dump(1);
  const auto props = parse_properties("semiconj,replay");
  const int clean = exit_code(verify_run(load_run(first.string()), props));
  const int flipped = exit_code(verify_run(load_run(mutated.string()), props));
  detail += "; verify exit " + std::to_string(clean) + " clean, " + std::to_string(flipped) + " mutated";
  bool ok = diff.empty() && clean == kExitPass && flipped != kExitPass;
  if (!pcircle.empty()) {
    const int cli_clean = run_exit(pcircle + " verify " + first.string() + " --props semiconj,replay");
    const int cli_flipped = run_exit(pcircle + " verify " + mutated.string() + " --props semiconj,replay");
    detail += "; pcircle verify exit " + std::to_string(cli_clean) + " clean, " + std::to_string(cli_flipped) + " mutated";
    ok = ok && cli_clean == kExitPass && cli_flipped != kExitPass;
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <pcircle binary> <diagnostic config> [work dir]\n";
    return 1;
  }
  const std::string pcircle = argv[1];
  const fs::path work = argc > 3 ? fs::path(argv[3]) : fs::temp_directory_path() / "pcircle_acceptance";
  try {
    fs::remove_all(work);
    fs::create_directories(work);
    const RunConfig config = load_config(argv[2]);
    const fs::path first = work / "run_a";
    std::ostringstream log;
    const auto built = build_run(config, first.string(), log);
    const auto lr = load_run(first.string());

    criterion(1, 60, crooked_engine);
    criterion(2, 120, theta_certification);
    criterion(3, 0, shear_algebra);
    criterion(4, 0, return_period_oracle);
    criterion(5, 1800, [&] { return end_to_end(built.reports); });
    criterion(6, 0, [&] { return semiconjugacy(lr); });
    criterion(7, 0, [&] { return deviations(lr); });
    criterion(8, 0, [&] { return determinism(first, config, work, pcircle); });
  } catch (const std::exception& e) {
    std::cerr << "acceptance run aborted: " << e.what() << "\n";
    return 1;
  }
  std::cout << failures << " of 8 criteria failed" << std::endl;
  return 0;
}
