#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "polyfsi/acceptance.hpp"
#include "polyfsi/harness.hpp"

using namespace polyfsi;

int main(int argc, char** argv) {
  CLI::App app{"Coupled solute-solvent-structure solver on a moving disk"};
  app.require_subcommand(1);

  std::string config_path, out_dir, scenario_override, resume_path;
  uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* cmd, bool need_config) {
    auto* copt = cmd->add_option("--config", config_path, "JSON run configuration");
    if (need_config) copt->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--scenario", scenario_override, "scenario name override");
    cmd->add_option_function<uint64_t>(
        "--seed", [&](uint64_t s) { seed = s; seed_set = true; }, "RNG seed override");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "execute a scenario");
  add_common(run_cmd, true);
  CLI::App* val_cmd = app.add_subcommand("validate", "check dataset admissibility");
  add_common(val_cmd, true);
  CLI::App* res_cmd = app.add_subcommand("resume", "resume from a checkpoint");
  add_common(res_cmd, true);
  res_cmd->add_option("--resume", resume_path, "checkpoint file")->required();
  CLI::App* suite_cmd = app.add_subcommand("suite", "run the acceptance suite");
  suite_cmd->add_option("--out", out_dir, "scratch directory for suite runs");

  CLI11_PARSE(app, argc, argv);

  auto load_config = [&]() {
    RunConfig cfg = RunConfig::from_json_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (const char* root = std::getenv("POLYFSI_OUT_ROOT"); root && out_dir.empty())
      cfg.out_dir = std::string(root) + "/" + cfg.out_dir;
    if (!scenario_override.empty()) cfg.scenario = scenario_override;
    if (seed_set) cfg.seed = seed;
    cfg.validate();
    return cfg;
  };

  try {
    if (run_cmd->parsed()) {
      const RunReport rep = run(load_config());
      std::cout << "summary: " << rep.summary_path << "\n";
      if (rep.exit_code != 0) std::cerr << "run failed: " << rep.error << "\n";
      return rep.exit_code;
    }
    if (val_cmd->parsed()) {
      const DatasetValidation v = validate_dataset(load_config());
      std::cout << validation_to_json(v) << "\n";
      return v.pass ? 0 : 1;
    }
    if (res_cmd->parsed()) {
      const RunReport rep = run(load_config(), resume_path);
      std::cout << "summary: " << rep.summary_path << "\n";
      return rep.exit_code;
    }
    if (suite_cmd->parsed()) {
      const std::string scratch = out_dir.empty() ? "acceptance_out" : out_dir;
      const auto results = run_acceptance_suite(scratch);
      return print_acceptance_table(results, std::cout) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
