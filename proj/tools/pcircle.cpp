#include <CLI11.hpp>

#include <iostream>

#include "pseudocircle/run.hpp"

using namespace pseudocircle;

int main(int argc, char** argv) {
  CLI::App app{"pcircle: build, verify, render and report pseudo-circle constructions"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* build = app.add_subcommand("build", "run the stage search and persist every stage");
  build->add_option("--config", config_path, "run configuration (JSON)")->required();
  build->add_option("--out", out_dir, "run directory")->required();

  std::string dir, props;
  auto* verify = app.add_subcommand("verify", "recompute properties from a run directory");
  verify->add_option("dir", dir, "run directory")->required();
  verify->add_option("--props", props, "comma-separated subset of claim,P1,P2,P3,P4,P5,BF,semiconj,replay");

  std::string kind = "leaf";
  double x = 0.25;
  int res = 1024;
  std::optional<int> stage;
  auto* render = app.add_subcommand("render", "write a PPM picture of a stage");
  render->add_option("dir", dir, "run directory")->required();
  render->add_option("--kind", kind, "leaf, chains or orbit")->check(CLI::IsMember({"leaf", "chains", "orbit"}));
  render->add_option("--x", x, "vertical circle {x} x T^1, or orbit seed (x, 1/2)");
  render->add_option("--res", res, "pixels per side")->check(CLI::PositiveNumber);
  render->add_option("--stage", stage, "stage index (default: last)");

  bool csv = false;
  auto* report = app.add_subcommand("report", "summarise the stored reports per step");
  report->add_option("dir", dir, "run directory")->required();
  report->add_flag("--csv", csv, "CSV output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) {
      const auto outcome = build_run(load_config(config_path), out_dir, std::cout);
      if (outcome.partial) std::cerr << "build stopped: " << *outcome.partial << "\n";
      return outcome.exit;
    }
    if (*verify) {
      const auto reports = verify_run(load_run(dir), parse_properties(props));
      std::cout << text_table(reports);
      return exit_code(reports);
    }
    if (*render) {
      const auto path = render_run(dir, load_run(dir), kind, x, res, stage, std::cerr);
      std::cout << path << "\n";
      return kExitPass;
    }
    if (*report) {
      std::cout << run_report(dir, csv);
      return kExitPass;
    }
  } catch (const BudgetError& e) {
    std::cerr << "budget exhausted (" << e.property() << "): " << e.what() << "\n";
    return kExitBudget;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitFail;
}
