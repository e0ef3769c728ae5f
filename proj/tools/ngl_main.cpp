#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ngl/harness/experiment.hpp"
#include "ngl/harness/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Inexact-gradient optimization experiments"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", run_config, "Config file")->required();

  std::string sweep_config;
  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Run every point of a sweep");
  sweep->add_option("config", sweep_config, "Config file")->required();
  sweep->add_option("-j,--jobs", jobs, "Runs executed in parallel");

  ngl::harness::VerifyOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "Run the built-in invariant suite");
  verify->add_option("--mutate-step", verify_opts.step_scale,
                     "Multiply every envelope run's step size by this factor");

  std::string theorem;
  std::vector<std::string> constants;
  auto* bounds = app.add_subcommand("bounds", "Print an envelope table");
  bounds->add_option("theorem", theorem, "Theorem id, e.g. GD_PL")->required();
  bounds->add_option("constants", constants, "key=value constants (mu, L, alpha, ...)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ngl::harness::kExitConfig;
  }

  if (*run) return ngl::harness::cli_run(run_config, std::cout, std::cerr);
  if (*sweep) return ngl::harness::cli_sweep(sweep_config, jobs, std::cout, std::cerr);
  if (*verify) return ngl::harness::cli_verify(verify_opts, std::cout);
  return ngl::harness::cli_bounds(theorem, constants, std::cout, std::cerr);
}
