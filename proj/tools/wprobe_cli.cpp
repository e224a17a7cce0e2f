// wprobe: run one experiment from a config file.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wprobe/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Wave-packet probes of noisy pseudodifferential operators"};
  app.set_version_flag("--version", WPROBE_VERSION);

  std::string command;
  std::string config;
  wprobe::RunOptions opt;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t trials = 0;

  app.add_option("command", command, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(wprobe::command_names()));
  app.add_option("--config", config, "Config file (key = value)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  auto* out_opt = app.add_option("--out", out, "Output directory (overrides the config)");
  auto* trials_opt = app.add_option("--trials", trials, "Monte Carlo trials (overrides the config)");
  app.add_option("--workers", opt.workers, "Worker threads, 0 for the OpenMP default")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", opt.quiet, "No progress output");
  app.add_flag("--timing", opt.timing, "Fill the wall_time column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (*seed_opt) opt.seed = seed;
  if (*out_opt) opt.out = out;
  if (*trials_opt) opt.trials = trials;
  return wprobe::run_command(command, config, opt, std::cout, std::cerr);
}
