#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wprobe/experiments.hpp"
#include "wprobe/recovery.hpp"

namespace wprobe {

/// One `term = order ; c(x) ; h(-1) ; h(+1)` line.
struct TermSpec {
  double order = 0.0;
  Expression c;
  double h_minus = 1.0;
  double h_plus = 1.0;

  friend bool operator==(const TermSpec&, const TermSpec&) = default;
};

/// Everything a run needs. The schema is documented in docs/config.md.
struct ExperimentConfig {
  std::vector<TermSpec> terms;
  double beta = 0.0;
  std::vector<double> x0{0.0};
  double xi0 = 1.0;
  std::vector<std::optional<double>> lambda;  // per-term overrides, nullopt = auto
  double margin = 0.5;
  double sharpness = 1.0;
  bool noise = true;
  std::vector<SubtractMode> subtract{SubtractMode::Oracle};
  double N = 48.0;
  std::vector<double> N_grid{4, 6, 8, 12, 16, 24, 32, 48, 64};
  std::vector<double> T_grid{8, 16, 32, 64};
  std::size_t K = 64;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::size_t j = 1;  // term used by rate and asymptotics
  double epsilon = 0.1;
  double delta = 0.1;
  std::optional<double> alert;

  // single-term setting of noise-stats, variance-scaling and nonconvergence
  VarianceTarget noise_target = VarianceTarget::Plain;
  double noise_m = 1.0;
  double noise_lambda = 2.0;
  double noise_amplitude = 1.0;
  std::optional<double> noise_c;  // nullopt: a quarter of the noise sd at the largest T

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError naming
/// the line on unknown keys, repeated keys, malformed or non-finite values.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& c);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

/// The observable, measurement model and order plan described by the config.
Observable make_observable(const ExperimentConfig& c);
MeasurementModel make_model(const ExperimentConfig& c);
OrderPlan make_plan(const ExperimentConfig& c);
NoiseSetting make_noise_setting(const ExperimentConfig& c);

}  // namespace wprobe
