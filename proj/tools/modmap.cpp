// Experiment driver: run / validate / simulate over JSON configs.
#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "modmap/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"MAP estimation of latent time series via consensus ADMM"};
  app.require_subcommand(1);

  std::string config_path;
  modmap::cli::Overrides overrides;
  std::string out_dir;
  std::int64_t seed = -1;
  int max_iter = 0;

  auto add_common = [&](CLI::App* sub, bool solver_flags) {
    sub->add_option("config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config out_dir)");
    sub->add_option("--seed", seed, "simulation seed override");
    if (solver_flags) sub->add_option("--max-iter", max_iter, "solver iteration cap override");
    sub->add_flag("--quiet", overrides.quiet, "suppress the summary line");
  };

  CLI::App* run = app.add_subcommand("run", "simulate (if needed), solve, and write outputs");
  add_common(run, true);
  CLI::App* validate = app.add_subcommand("validate", "check a config and list every problem");
  validate->add_option("config", config_path, "JSON config file")->required();
  validate->add_flag("--quiet", overrides.quiet, "suppress the ok line");
  CLI::App* simulate = app.add_subcommand("simulate", "write simulated data without solving");
  add_common(simulate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (!out_dir.empty()) overrides.out_dir = out_dir;
  if (seed >= 0) overrides.seed = static_cast<std::uint64_t>(seed);
  if (max_iter > 0) overrides.max_iter = max_iter;

  if (run->parsed()) return modmap::cli::run_command(config_path, overrides);
  if (simulate->parsed()) return modmap::cli::simulate_command(config_path, overrides);
  return modmap::cli::validate_command(config_path, overrides.quiet);
}
