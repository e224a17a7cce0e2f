#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wprobe/config.hpp"
#include "wprobe/report.hpp"
#include "json.hpp"

namespace wprobe {

/// Command line overrides applied on top of the config file.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> trials;
  int workers = 0;   // 0: OpenMP default
  bool quiet = false;
  bool timing = false;
};

struct CommandResult {
  std::vector<ResultRow> rows;
  nlohmann::ordered_json summary;
  std::vector<PlotSeries> plots;
};

const std::vector<std::string>& command_names();

/// Runs one command without touching the file system. Throws ConfigError or
/// NumericalError.
CommandResult execute(const std::string& name, const ExperimentConfig& config,
                      const RunOptions& options);

/// Loads the config, runs the command and writes <out>/<name>.csv,
/// <name>.summary.json, <name>.manifest.json and plot files. Returns the exit
/// status: 0 on success, 2 on a configuration error, 3 on a numerical failure.
/// Errors are reported on `err`.
int run_command(const std::string& name, const std::string& config_path,
                const RunOptions& options, std::ostream& log, std::ostream& err);

}  // namespace wprobe
