#include "pseudocircle/run.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "pseudocircle/render.hpp"

namespace pseudocircle {

namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const ThetaOptions& o) {
  return {{"delta_ratio", o.delta_ratio},
          {"proto_ratio", o.proto_ratio},
          {"max_frequencies", o.max_frequencies},
          {"grid", o.grid},
          {"zigzag_budget", o.zigzag_budget}};
}

ThetaOptions theta_options_from_json(const json& j, ThetaOptions o) {
  o.delta_ratio = j.value("delta_ratio", o.delta_ratio);
  o.proto_ratio = j.value("proto_ratio", o.proto_ratio);
  o.max_frequencies = j.value("max_frequencies", o.max_frequencies);
  o.grid = j.value("grid", o.grid);
  o.zigzag_budget = j.value("zigzag_budget", o.zigzag_budget);
  return o;
}

json to_json(const StageOverride& o) {
  json j = json::object();
  if (o.N) j["N"] = *o.N;
  if (o.b) j["b"] = *o.b;
  if (o.eps) j["eps"] = *o.eps;
  if (o.k) j["k"] = *o.k;
  if (o.theta_eps) j["theta_eps"] = *o.theta_eps;
  return j;
}

StageOverride stage_override_from_json(const json& j) {
  StageOverride o;
  if (j.contains("N")) o.N = j["N"].get<long>();
  if (j.contains("b")) o.b = j["b"].get<long>();
  if (j.contains("eps")) o.eps = j["eps"].get<double>();
  if (j.contains("k")) o.k = j["k"].get<long>();
  if (j.contains("theta_eps")) o.theta_eps = j["theta_eps"].get<double>();
  return o;
}

json to_json(const RunConfig& c) {
  const auto& b = c.search.budgets;
  json schedule = json::array();
  for (const auto& s : c.search.schedule) schedule.push_back(to_json(s));
  return {{"alpha0", to_json(c.alpha0)},
          {"N0", c.N0},
          {"eps0", c.eps0},
          {"stages", c.stages},
          {"budgets",
           {{"N_max", b.N_max},
            {"b_max", b.b_max},
            {"q_max", b.q_max.str()},
            {"seconds", b.seconds},
            {"eps_halvings", b.eps_halvings}}},
          {"verify", to_json(c.search.verify)},
          {"theta", to_json(c.search.theta)},
          {"table_log2", c.search.table_log2},
          {"schedule", schedule}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  if (j.contains("alpha0")) c.alpha0 = rotation_from_json(j["alpha0"]);
  c.N0 = j.value("N0", c.N0);
  c.eps0 = j.value("eps0", c.eps0);
  c.stages = j.value("stages", c.stages);
  auto& b = c.search.budgets;
  if (j.contains("budgets")) {
    const auto& jb = j["budgets"];
    b.N_max = jb.value("N_max", b.N_max);
    b.b_max = jb.value("b_max", b.b_max);
    if (jb.contains("q_max"))
      b.q_max = jb["q_max"].is_string() ? BigInt(jb["q_max"].get<std::string>()) : BigInt(jb["q_max"].get<long long>());
    b.seconds = jb.value("seconds", b.seconds);
    b.eps_halvings = jb.value("eps_halvings", b.eps_halvings);
  }
  if (j.contains("seed")) c.search.verify.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("verify")) c.search.verify = verify_options_from_json(j["verify"], c.search.verify);
  if (j.contains("theta")) c.search.theta = theta_options_from_json(j["theta"]);
  c.search.table_log2 = j.value("table_log2", c.search.table_log2);
  if (j.contains("schedule"))
    for (const auto& s : j["schedule"]) c.search.schedule.push_back(stage_override_from_json(s));

  if (c.stages < 1) throw PreconditionError("config: stages must be at least 1 (nothing to build)");
  if (c.N0 < 4) throw PreconditionError("config: N0 must be at least 4");
  if (!(c.eps0 > 0 && c.eps0 < 0.5)) throw PreconditionError("config: eps0 must lie in (0, 1/2)");
  if (b.N_max < 1 || b.b_max < 1 || b.q_max < 1 || !(b.seconds > 0) || b.eps_halvings < 1)
    throw PreconditionError("config: budgets must be positive");
  if (c.search.table_log2 < 0 || c.search.table_log2 > 26) throw PreconditionError("config: table_log2 out of range");
  return c;
}

namespace {

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("missing file: " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw IoError("corrupt file: " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << j.dump(1) << "\n";
  if (!f) throw IoError("write failed: " + path.string());
}

fs::path stage_path(const fs::path& dir, int n) { return dir / ("stage_" + std::to_string(n) + ".json"); }
fs::path report_path(const fs::path& dir, int n) { return dir / ("report_" + std::to_string(n) + ".json"); }

PropertyReport bf_report(const Construction& run, const std::vector<PropertyReport>& p1, const VerifyOptions& vo) {
  std::vector<long> N;
  std::vector<double> eps;
  for (const auto& s : run.stages()) {
    N.push_back(s.N);
    eps.push_back(s.eps);
  }
  return verify_BF(p1, N, eps, vo);
}

}  // namespace

RunConfig load_config(const std::string& path) {
  try {
    return run_config_from_json(read_json(path));
  } catch (const json::exception& e) {
    throw IoError("corrupt file: " + path + ": " + e.what());
  }
}

int exit_code(const std::vector<PropertyReport>& reports) {
  Verdict v = Verdict::pass;
  for (const auto& r : reports) v = combine(v, r.verdict);
  switch (v) {
    case Verdict::pass: return kExitPass;
    case Verdict::inconclusive: return kExitInconclusive;
    case Verdict::fail: return kExitFail;
  }
  return kExitFail;
}

const std::vector<std::string>& property_names() {
  static const std::vector<std::string> names = {"claim", "P1", "P2", "P3", "P4", "P5", "BF", "semiconj", "replay"};
  return names;
}

std::set<std::string> parse_properties(const std::string& list) {
  const auto& known = property_names();
  if (list.empty()) return {known.begin(), known.end()};
  std::set<std::string> out;
  std::stringstream s(list);
  std::string item;
  while (std::getline(s, item, ',')) {
    if (item.empty()) continue;
    if (std::find(known.begin(), known.end(), item) == known.end())
      throw PreconditionError("unknown property '" + item + "'");
    out.insert(item);
  }
  return out;
}

std::vector<PropertyReport> replay_reports(const LoadedRun& r) {
  std::vector<PropertyReport> out;
  for (const auto& s : r.run.stages()) {
    if (!s.theta) continue;
    const auto rep = replay_theta(*s.theta, r.config.search.theta);
    PropertyReport p;
    p.id = "replay";
    p.n = s.n;
    p.verdict = rep.ok() ? Verdict::pass : Verdict::fail;
    p.measured = {{"sup_error", rep.sup_error},
                  {"within_delta", rep.within_delta},
                  {"certified", rep.certified},
                  {"matches_record", rep.matches_record},
                  {"rising_margin", rep.rising_margin},
                  {"falling_margin", rep.falling_margin}};
    if (!rep.ok()) p.counterexample = {{"reason", !rep.matches_record ? "stored certificate differs from replay"
                                                                       : "theta fails its certificate"}};
    out.push_back(p);
  }
  return out;
}

BuildOutcome build_run(const RunConfig& config, const std::string& dir_name, std::ostream& log) {
  const fs::path dir(dir_name);
  fs::create_directories(dir);
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("stage_", 0) == 0 || name.rfind("report_", 0) == 0 || name == "PARTIAL.json" ||
        name == "summary.json")
      fs::remove_all(e.path());
  }
  write_json(dir / "config.json", to_json(config));

  BuildOutcome out;
  LoadedRun lr{config, Construction(config.alpha0, config.N0, config.eps0)};
  auto& run = lr.run;
  write_json(stage_path(dir, 0), to_json(run.stage(0)));
  std::vector<PropertyReport> p1;
  for (int s = 0; s < config.stages; ++s) {
    log << "step " << s << " -> " << s + 1 << "\n";
    StepReport step;
    try {
      step = choose_next_stage(run, config.search);
    } catch (const BudgetError& e) {
      out.partial = e.property() + ": " + e.what();
      out.exit = kExitBudget;
    } catch (const CertificationError& e) {
      out.partial = std::string("theta: ") + e.what();
      out.exit = kExitFail;
    }
    if (out.partial) {
      write_json(dir / "PARTIAL.json", {{"completed_steps", s}, {"reason", *out.partial}});
      log << "stopped: " << *out.partial << "\n";
      break;
    }
    write_json(stage_path(dir, s), to_json(run.stage(s)));
    write_json(stage_path(dir, s + 1), to_json(run.stage(s + 1)));
    write_json(report_path(dir, s), to_json(step));
    log << text_table(step.reports);
    for (const auto& r : step.reports) {
      out.reports.push_back(r);
      if (r.id == "P1") p1.push_back(r);
    }
  }
  if (!p1.empty()) {
    out.reports.push_back(bf_report(run, p1, config.search.verify));
    for (auto& r : replay_reports(lr)) out.reports.push_back(r);
    log << text_table({out.reports.end() - static_cast<long>(run.size()), out.reports.end()});
  }
  if (!out.partial) out.exit = exit_code(out.reports);
  json all = json::array();
  for (const auto& r : out.reports) all.push_back(to_json(r));
  write_json(dir / "summary.json",
             {{"reports", all}, {"exit", out.exit}, {"partial", out.partial ? json(*out.partial) : json(nullptr)}});
  return out;
}

LoadedRun load_run(const std::string& dir_name) {
  const fs::path dir(dir_name);
  if (!fs::is_directory(dir)) throw IoError("not a run directory: " + dir_name);
  RunConfig config = load_config((dir / "config.json").string());
  std::vector<StageParams> stages;
  for (int n = 0; fs::exists(stage_path(dir, n)); ++n) {
    try {
      stages.push_back(stage_from_json(read_json(stage_path(dir, n))));
    } catch (const json::exception& e) {
      throw IoError("corrupt file: " + stage_path(dir, n).string() + ": " + e.what());
    } catch (const PreconditionError& e) {
      throw IoError("corrupt file: " + stage_path(dir, n).string() + ": " + e.what());
    }
    if (stages.back().n != n) throw IoError("corrupt file: " + stage_path(dir, n).string() + ": wrong stage index");
  }
  if (stages.empty()) throw IoError("missing file: " + stage_path(dir, 0).string());
  if (stages.back().theta) throw IoError("missing file: " + stage_path(dir, static_cast<int>(stages.size())).string());
  LoadedRun lr{config, Construction(stages[0].alpha, stages[0].N, stages[0].eps)};
  for (std::size_t n = 0; n + 1 < stages.size(); ++n) {
    const auto& s = stages[n];
    if (!s.theta || s.b < 1)
      throw IoError("corrupt file: " + stage_path(dir, static_cast<int>(n)).string() + ": no shear for the next stage");
    try {
      lr.run.push(s.b, s.theta, s.theta_eps, stages[n + 1], config.search.table_log2);
    } catch (const PreconditionError& e) {
      throw IoError("corrupt file: " + stage_path(dir, static_cast<int>(n)).string() + ": " + e.what());
    }
  }
  return lr;
}

std::vector<PropertyReport> verify_run(const LoadedRun& lr, const std::set<std::string>& props) {
  const auto& run = lr.run;
  const auto& vo = lr.config.search.verify;
  auto want = [&](const char* p) { return props.count(p) > 0; };
  std::vector<PropertyReport> out, p1;
  for (int n = 0; n + 1 < static_cast<int>(run.size()); ++n) {
    const auto& cur = run.stage(n);
    const auto& next = run.stage(n + 1);
    if (want("claim")) {
      auto r = verify_claim(*cur.theta, cur.N, next.N, vo.claim_omegas);
      r.n = n;
      out.push_back(r);
    }
    if (want("P1") || want("BF")) {
      auto r = verify_P1(run.stack(n), *run.shear(n), n, cur.N, cur.eps, next.N, next.eps, vo);
      p1.push_back(r);
      if (want("P1")) out.push_back(r);
    }
    if (want("P2") || want("P3")) out.push_back(verify_P2_P3(cur.alpha, next.alpha, n, run.stack(n + 1), vo));
    if (want("P4") || want("P5")) {
      std::optional<StageView> prev;
      if (n >= 1) prev = StageView{run.stack(n - 1), run.stage(n - 1).alpha};
      out.push_back(verify_P4_P5(prev ? &*prev : nullptr, StageView{run.stack(n), cur.alpha},
                                 StageView{run.stack(n + 1), next.alpha}, n, vo));
    }
  }
  if (want("semiconj"))
    for (int n = 0; n < static_cast<int>(run.size()); ++n)
      out.push_back(verify_semiconjugacy(run.stack(n), run.stage(n).alpha, n, vo));
  if (want("BF") && !p1.empty()) out.push_back(bf_report(run, p1, vo));
  if (want("replay"))
    for (auto& r : replay_reports(lr)) out.push_back(r);
  return out;
}

std::string run_report(const std::string& dir_name, bool csv) {
  const fs::path dir(dir_name);
  const std::vector<std::string> cols = {"n",           "N_next",        "eps_next",     "q_next",
                                         "b",           "k",             "claim",        "P1",
                                         "max_diameter", "containment_margin", "P2-P3", "rotation_covering_radius",
                                         "f_covering_bound", "P4-P5",    "d0_f",         "p_distance",
                                         "semiconj"};
  std::vector<std::vector<std::string>> rows;
  auto num = [](const json& v) {
    std::ostringstream s;
    s << std::setprecision(6) << v.get<double>();
    return s.str();
  };
  for (int n = 0; fs::exists(report_path(dir, n)); ++n) {
    const json rep = read_json(report_path(dir, n));
    const json cur = read_json(stage_path(dir, n));
    const json next = read_json(stage_path(dir, n + 1));
    std::map<std::string, json> by_id;
    for (const auto& r : rep.at("reports")) by_id[r.at("id").get<std::string>()] = r;
    auto verdict = [&](const std::string& id) { return by_id.count(id) ? by_id[id]["verdict"].get<std::string>() : "-"; };
    auto measured = [&](const std::string& id, const std::string& key) {
      return by_id.count(id) && by_id[id]["measured"].contains(key) ? num(by_id[id]["measured"][key]) : std::string("-");
    };
    rows.push_back({std::to_string(n), std::to_string(next.at("N").get<long>()), num(next.at("eps")),
                    next.at("alpha").at("q").get<std::string>(), std::to_string(cur.at("b").get<long>()),
                    std::to_string(next.at("k").get<long>()), verdict("claim"), verdict("P1"),
                    measured("P1", "max_diameter"), measured("P1", "containment_margin"), verdict("P2-P3"),
                    measured("P2-P3", "rotation_covering_radius"), measured("P2-P3", "f_covering_bound"),
                    verdict("P4-P5"), measured("P4-P5", "d0_f"), measured("P4-P5", "p_distance"), verdict("semiconj")});
  }
  if (rows.empty()) throw IoError("missing file: " + report_path(dir, 0).string());
  std::ostringstream out;
  if (csv) {
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << "\n";
    }
    return out.str();
  }
  std::vector<std::size_t> w(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    w[i] = cols[i].size();
    for (const auto& r : rows) w[i] = std::max(w[i], r[i].size());
  }
  for (std::size_t i = 0; i < cols.size(); ++i) out << std::left << std::setw(static_cast<int>(w[i] + 2)) << cols[i];
  out << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << std::left << std::setw(static_cast<int>(w[i] + 2)) << r[i];
    out << "\n";
  }
  return out.str();
}

std::string render_run(const std::string& dir_name, const LoadedRun& lr, const std::string& kind, double x,
                       int resolution, std::optional<int> stage, std::ostream& log) {
  const int n = stage ? *stage : lr.run.last();
  if (n < 0 || n > lr.run.last()) throw PreconditionError("render: no stage " + std::to_string(n));
  if (resolution < 1) throw PreconditionError("render: resolution must be positive");
  const auto& s = lr.run.stage(n);
  const auto H = lr.run.stack(n);
  std::optional<Rendering> img;
  if (kind == "leaf") {
    img = render_leaf(H, x, resolution);
  } else if (kind == "chains") {
    img = render_chains(H, s.N, s.eps, x, resolution);
  } else if (kind == "orbit") {
    const BigInt cap = BigInt(1) << 20;
    const long k = static_cast<long>(s.alpha.q() < cap ? s.alpha.q() : cap);
    img = render_orbit(H, s.alpha, {static_cast<Real>(x), 0.5L}, k, resolution);
  } else {
    throw PreconditionError("render: unknown kind '" + kind + "' (leaf, chains, orbit)");
  }
  if (!img->warning.empty()) log << "warning: " << img->warning << "\n";
  std::ostringstream name;
  name << kind << "_" << x << ".ppm";
  const fs::path sub = fs::path(dir_name) / ("stage_" + std::to_string(n));
  fs::create_directories(sub);
  const fs::path path = sub / name.str();
  img->canvas.write_ppm(path.string());
  return path.string();
}

}  // namespace pseudocircle
