#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wprobe/spectral.hpp"
#include "wprobe/experiments.hpp"

namespace wprobe {

inline constexpr int kResultSchemaVersion = 1;

/// One CSV line. Empty optionals are written as empty fields.
struct ResultRow {
  std::string experiment_id;
  std::string command;
  std::size_t j = 0;
  double parameter = 0.0;  // N or T
  cplx value;
  std::optional<cplx> truth;
  std::optional<double> error;
  std::optional<double> variance;
  std::optional<double> ci_half_width;
  std::uint64_t seed = 0;
  std::optional<double> wall_time;  // seconds; only with --timing
};

/// Header line, without the trailing newline.
std::string csv_header();
std::string csv_line(const ResultRow& row);
/// Header plus one line per row, '\n' terminated.
std::string to_csv(const std::vector<ResultRow>& rows);

/// A plain-text x/y series: '#' comment lines, a column header, whitespace
/// separated values.
struct PlotSeries {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> comments;
};

PlotSeries plot_variance(const VarianceScalingResult& r);
PlotSeries plot_deviation(const DeviationCurve& curve, const std::string& name);
PlotSeries plot_trajectory(const TrajectoryResult& r, const std::string& name);
PlotSeries plot_rates(const std::vector<RatePoint>& rates, const std::string& name);

/// Writes dir/<name>.dat for each non-empty series and returns one warning per
/// empty series (no file is written for those).
std::vector<std::string> emit_plot_data(const std::filesystem::path& dir,
                                        const std::vector<PlotSeries>& series);

/// Writes `text` to `path`, creating parent directories. Throws ConfigError
/// when the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& text);

/// %.17g formatting shared by every artifact.
std::string format_number(double v);

}  // namespace wprobe
