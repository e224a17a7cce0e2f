#include "wprobe/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wprobe/errors.hpp"

namespace wprobe {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

// Identifiers are ours, but quote anyway if one ever carries a comma.
std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

std::string csv_header() {
  return "schema_version,experiment_id,command,j,parameter,value_re,value_im,truth_re,truth_im,"
         "error,variance,ci_half_width,seed,wall_time";
}

std::string csv_line(const ResultRow& r) {
  std::string s = std::to_string(kResultSchemaVersion);
  s += "," + field(r.experiment_id);
  s += "," + field(r.command);
  s += "," + std::to_string(r.j);
  s += "," + format_number(r.parameter);
  s += "," + format_number(r.value.real());
  s += "," + format_number(r.value.imag());
  s += "," + (r.truth ? format_number(r.truth->real()) : std::string());
  s += "," + (r.truth ? format_number(r.truth->imag()) : std::string());
  s += "," + opt(r.error);
  s += "," + opt(r.variance);
  s += "," + opt(r.ci_half_width);
  s += "," + std::to_string(r.seed);
  s += "," + opt(r.wall_time);
  return s;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string s = csv_header() + "\n";
  for (const auto& r : rows) s += csv_line(r) + "\n";
  return s;
}

PlotSeries plot_variance(const VarianceScalingResult& r) {
  PlotSeries p;
  p.name = "variance_scaling";
  p.columns = {"log_T", "log_var"};
  for (const auto& pt : r.points) p.rows.push_back({std::log(pt.T), std::log(pt.variance)});
  if (!r.points.empty()) {
    p.comments = {"fit: log_var = intercept + slope * log_T",
                  "slope = " + format_number(r.fit.slope),
                  "intercept = " + format_number(r.fit.intercept),
                  "expected_slope = " + format_number(r.expected_slope)};
  }
  return p;
}

PlotSeries plot_deviation(const DeviationCurve& curve, const std::string& name) {
  PlotSeries p;
  p.name = name;
  p.columns = {"T", "p_hat", "half_width"};
  p.comments = {"c = " + format_number(curve.c)};
  for (const auto& pt : curve.points) {
    p.rows.push_back({pt.parameter, pt.interval.p_hat, pt.interval.half_width()});
  }
  return p;
}

PlotSeries plot_trajectory(const TrajectoryResult& r, const std::string& name) {
  PlotSeries p;
  p.name = name;
  p.columns = {"N", "error", "tube"};
  for (const auto& pt : r.points) p.rows.push_back({pt.N, pt.error, pt.tube});
  return p;
}

PlotSeries plot_rates(const std::vector<RatePoint>& rates, const std::string& name) {
  PlotSeries p;
  p.name = name;
  p.columns = {"N", "p_hat", "lower", "upper"};
  for (const auto& pt : rates) {
    p.rows.push_back({pt.N, pt.interval.p_hat, pt.interval.lower, pt.interval.upper});
  }
  return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cli_io: cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("cli_io: write to '" + path.string() + "' failed");
}

std::vector<std::string> emit_plot_data(const std::filesystem::path& dir,
                                        const std::vector<PlotSeries>& series) {
  std::vector<std::string> warnings;
  for (const auto& s : series) {
    if (s.rows.empty()) {
      warnings.push_back("cli_io: series '" + s.name + "' is empty; no plot file written");
      continue;
    }
    std::ostringstream o;
    for (const auto& c : s.comments) o << "# " << c << "\n";
    for (std::size_t i = 0; i < s.columns.size(); ++i) o << (i ? " " : "") << s.columns[i];
    o << "\n";
    for (const auto& row : s.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) o << (i ? " " : "") << format_number(row[i]);
      o << "\n";
    }
    write_text(dir / (s.name + ".dat"), o.str());
  }
  return warnings;
}

}  // namespace wprobe
