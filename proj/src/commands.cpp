#include "wprobe/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <ostream>

#include "wprobe/errors.hpp"
#include "wprobe/rng.hpp"

#ifndef WPROBE_VERSION
#define WPROBE_VERSION "unknown"
#endif

namespace wprobe {

namespace {

using json = nlohmann::ordered_json;

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json plan_json(const OrderPlan& p) {
  json j;
  j["m_list"] = p.m_list;
  j["beta"] = p.beta;
  j["j_beta"] = p.j_beta;
  j["k_beta"] = p.k_beta;
  j["lambda_bound"] = p.lambda_bound;
  j["lambda"] = p.lambda;
  std::vector<std::string> modes;
  for (auto m : p.mode) modes.push_back(to_string(m));
  j["mode"] = modes;
  return j;
}

json wilson_json(const WilsonInterval& w) {
  return json{{"p_hat", w.p_hat}, {"lower", w.lower}, {"upper", w.upper}};
}

json rates_json(const std::vector<RatePoint>& rates) {
  json a = json::array();
  for (const auto& r : rates) {
    a.push_back({{"N", r.N}, {"successes", r.successes}, {"trials", r.trials},
                 {"interval", wilson_json(r.interval)}});
  }
  return a;
}

json fit_json(const SlopeRegression& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"stderr_slope", f.stderr_slope}};
}

CommandResult cmd_recover(const ExperimentConfig& c, std::uint64_t seed) {
  const OrderPlan plan = make_plan(c);
  RecoveryOptions opt;
  opt.modes = c.subtract;
  opt.N = c.N;
  opt.K = c.K;
  if (c.alert) opt.alert_threshold = *c.alert;
  const EstimatorReport rep =
      recover_expansion(make_model(c), plan, c.x0, c.xi0, opt, seed);
  CommandResult out;
  for (const auto& r : rep.rows) {
    ResultRow row;
    row.experiment_id = "recover/" + to_string(r.subtract) + "/" + to_string(r.mode) +
                        "/x0=" + short_number(r.x0);
    row.command = "recover";
    row.j = r.j;
    row.parameter = r.N;
    row.value = r.estimate;
    row.truth = r.truth;
    row.error = r.error;
    row.seed = r.seed;
    out.rows.push_back(row);
  }
  json terms = json::array();
  for (auto mode : c.subtract) {
    for (std::size_t j = 1; j <= plan.k_beta; ++j) {
      double worst = 0.0;
      for (const auto& r : rep.select(mode, j)) worst = std::max(worst, r.error);
      terms.push_back({{"subtract", to_string(mode)}, {"j", j}, {"max_error", worst}});
    }
  }
  out.summary["plan"] = plan_json(plan);
  out.summary["terms"] = terms;
  out.summary["any_alert"] = rep.any_alert();
  return out;
}

CommandResult cmd_noise_stats(const ExperimentConfig& c, std::uint64_t seed, std::size_t trials,
                              int workers) {
  std::vector<double> nodes = c.T_grid;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  WavePacketFamily fam;
  fam.x0 = c.x0.front();
  fam.xi0 = c.xi0;
  fam.lambda = c.noise_lambda;
  fam.profile = make_profile(c.sharpness);
  fam.validate();
  const NoiseKernel kernel = build_kernel(fam, nodes, c.beta);
  const auto paths = run_trials<std::vector<cplx>>(trials, workers, [&](std::size_t i) {
    return sample_path(kernel, derive_seed(seed, i, Purpose::NoisePath)).values;
  });
  const auto n = static_cast<double>(trials);
  CommandResult out;
  json nodes_json = json::array();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double ckk = kernel(k, k);
    std::vector<double> mod2(trials);
    std::vector<cplx> sq(trials);
    for (std::size_t i = 0; i < trials; ++i) {
      mod2[i] = std::norm(paths[i][k]) / ckk;
      sq[i] = paths[i][k] * paths[i][k] / ckk;
    }
    const MeanEstimate iso = mean_estimate(mod2);
    cplx pseudo{0.0, 0.0};
    for (const auto& v : sq) pseudo += v;
    pseudo /= n;
    double spread = 0.0;
    for (const auto& v : sq) spread += std::norm(v - pseudo);
    const double pseudo_se = std::sqrt(spread / (n - 1.0) / n);

    ResultRow row;
    row.command = "noise-stats";
    row.parameter = nodes[k];
    row.seed = seed;
    row.experiment_id = "noise-stats/isometry";
    row.value = iso.mean;
    row.truth = 1.0;
    row.error = std::abs(iso.mean - 1.0);
    row.variance = ckk;
    row.ci_half_width = 1.96 * iso.stderr_mean;
    out.rows.push_back(row);
    row.experiment_id = "noise-stats/pseudo-covariance";
    row.value = pseudo;
    row.truth = 0.0;
    row.error = std::abs(pseudo);
    row.ci_half_width = 1.96 * pseudo_se;
    out.rows.push_back(row);
    nodes_json.push_back({{"T", nodes[k]},
                          {"norm_beta_4", ckk},
                          {"isometry_ratio", iso.mean},
                          {"isometry_stderr", iso.stderr_mean},
                          {"pseudo_abs", std::abs(pseudo)},
                          {"pseudo_stderr", pseudo_se}});
  }
  out.summary["beta"] = c.beta;
  out.summary["lambda"] = c.noise_lambda;
  out.summary["route"] = kernel.route() == NoiseKernel::Route::Eigen ? "eigen" : "banded-ldlt";
  out.summary["nodes"] = nodes_json;
  return out;
}

CommandResult cmd_variance(const ExperimentConfig& c, std::uint64_t seed, std::size_t trials,
                           int workers) {
  const NoiseSetting s = make_noise_setting(c);
  const VarianceScalingResult r = variance_scaling_experiment(s, c.T_grid, trials, seed, workers);
  CommandResult out;
  for (const auto& p : r.points) {
    ResultRow row;
    row.experiment_id = std::string("variance-scaling/") +
                        (s.target == VarianceTarget::Plain ? "plain" : "averaged");
    row.command = "variance-scaling";
    row.j = 1;
    row.parameter = p.T;
    row.value = p.variance;
    row.truth = p.exact;
    row.error = std::abs(p.variance - p.exact) / p.exact;
    row.variance = p.variance;
    row.ci_half_width = 1.96 * p.stderr_var;
    row.seed = seed;
    out.rows.push_back(row);
  }
  out.summary["target"] = s.target == VarianceTarget::Plain ? "plain" : "averaged";
  out.summary["beta"] = s.beta;
  out.summary["m"] = s.m;
  out.summary["lambda"] = s.lambda;
  out.summary["fit"] = fit_json(r.fit);
  out.summary["expected_slope"] = r.expected_slope;
  out.plots.push_back(plot_variance(r));
  return out;
}

CommandResult cmd_nonconvergence(const ExperimentConfig& c, std::uint64_t seed,
                                 std::size_t trials, int workers) {
  const NoiseSetting s = make_noise_setting(c);
  if (c.T_grid.empty()) throw ConfigError("cli_io: T_grid is empty");
  const double threshold =
      c.noise_c ? *c.noise_c
                : 0.25 * noise_sd(s, *std::max_element(c.T_grid.begin(), c.T_grid.end()));
  const DeviationCurve curve =
      nonconvergence_experiment(s, c.noise_amplitude, threshold, c.T_grid, trials, seed, workers);
  CommandResult out;
  json points = json::array();
  for (const auto& p : curve.points) {
    ResultRow row;
    row.experiment_id = std::string("nonconvergence/") +
                        (s.target == VarianceTarget::Plain ? "plain" : "averaged");
    row.command = "nonconvergence";
    row.j = 1;
    row.parameter = p.parameter;
    row.value = p.interval.p_hat;
    row.truth = p.closed_form;
    row.error = std::abs(p.interval.p_hat - p.closed_form);
    row.variance = p.sigma2;
    row.ci_half_width = p.interval.half_width();
    row.seed = seed;
    out.rows.push_back(row);
    points.push_back({{"T", p.parameter}, {"exceed", p.exceed}, {"trials", p.trials},
                      {"interval", wilson_json(p.interval)}, {"sigma2", p.sigma2},
                      {"closed_form", p.closed_form}});
  }
  out.summary["c"] = curve.c;
  out.summary["points"] = points;
  out.summary["increasing_trend"] = curve.increasing_trend();
  out.summary["max_band_ratio"] = curve.max_band_ratio();
  out.plots.push_back(plot_deviation(curve, "deviation"));
  return out;
}

CommandResult cmd_rate(const ExperimentConfig& c, std::uint64_t seed, std::size_t trials,
                       int workers) {
  RateSetting s;
  s.model = make_model(c);
  s.plan = make_plan(c);
  s.j = c.j;
  s.K = c.K;
  s.N_grid = c.N_grid;
  s.trials = trials;
  const RateCertificate cert = rate_certificate_experiment(s, c.epsilon, c.delta, seed, workers);
  CommandResult out;
  const auto add = [&](const std::vector<RatePoint>& rates, const std::string& id) {
    for (const auto& p : rates) {
      ResultRow row;
      row.experiment_id = id;
      row.command = "rate";
      row.j = c.j;
      row.parameter = p.N;
      row.value = p.interval.p_hat;
      row.truth = 1.0 - c.delta;
      row.ci_half_width = p.interval.half_width();
      row.seed = seed;
      out.rows.push_back(row);
    }
  };
  add(cert.search, "rate/search");
  add(cert.verification, "rate/verify");
  json surface = json::array();
  for (const auto& p : cert.surface) {
    surface.push_back({{"epsilon", p.epsilon}, {"delta", p.delta}, {"N0", p.N0}});
  }
  out.summary["plan"] = plan_json(s.plan);
  out.summary["j"] = c.j;
  out.summary["epsilon"] = cert.epsilon;
  out.summary["delta"] = cert.delta;
  out.summary["N0"] = cert.N0;
  out.summary["search"] = rates_json(cert.search);
  out.summary["verification"] = rates_json(cert.verification);
  out.summary["surface"] = surface;
  out.summary["C_emp"] = cert.C_emp;
  out.summary["theta_emp"] = cert.theta_emp;
  out.plots.push_back(plot_rates(cert.search, "rate_search"));
  out.plots.push_back(plot_rates(cert.verification, "rate_verify"));

  // One noise realization followed along the whole grid.
  TrajectorySetting ts;
  ts.model = s.model;
  ts.term = TermSetup{c.j, c.terms.at(c.j - 1).order, s.plan.lambda_of(c.j)};
  ts.mode = s.plan.mode_of(c.j);
  ts.N_sequence = c.N_grid;
  ts.K = c.K;
  ts.theta = default_tube_exponent(ts.mode, ts.term.order, c.beta, ts.term.lambda);
  const TrajectoryResult tr = trajectory_as_convergence_check(ts, seed);
  out.summary["trajectory"] = {{"theta", ts.theta}, {"pass", tr.pass}};
  out.plots.push_back(plot_trajectory(tr, "trajectory"));
  return out;
}

CommandResult cmd_asymptotics(const ExperimentConfig& c, std::uint64_t seed) {
  const OrderPlan plan = make_plan(c);
  const MeasurementModel model = make_model(c);
  WavePacketFamily fam = model.family;
  fam.lambda = plan.lambda_of(1);
  const auto errors = asymptotic_error_probe(model.observable, fam, c.N_grid);
  CommandResult out;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    ResultRow row;
    row.experiment_id = "asymptotics/x0=" + short_number(fam.x0);
    row.command = "asymptotics";
    row.j = 1;
    row.parameter = c.N_grid[i];
    row.value = errors[i];
    row.error = errors[i];
    row.seed = seed;
    out.rows.push_back(row);
  }
  const double lam = fam.lambda;
  double expected = std::min(1.0, lam - 1.0);
  if (c.terms.size() > 1) expected = std::min(expected, lam * (c.terms[0].order - c.terms[1].order));
  out.summary["lambda"] = lam;
  if (c.N_grid.size() >= 4) {
    bool positive = std::all_of(errors.begin(), errors.end(), [](double e) { return e > 0.0; });
    if (positive) out.summary["fit"] = fit_json(fit_loglog(c.N_grid, errors));
  }
  out.summary["expected_slope"] = -expected;
  PlotSeries p;
  p.name = "asymptotics";
  p.columns = {"t", "error"};
  for (std::size_t i = 0; i < errors.size(); ++i) p.rows.push_back({c.N_grid[i], errors[i]});
  out.plots.push_back(p);
  return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"recover",        "noise-stats", "variance-scaling",
                                              "nonconvergence", "rate",        "asymptotics"};
  return names;
}

CommandResult execute(const std::string& name, const ExperimentConfig& config,
                      const RunOptions& options) {
  ExperimentConfig c = config;
  if (options.seed) c.seed = *options.seed;
  if (options.out) c.out = *options.out;
  if (options.trials) c.trials = *options.trials;
  // Every command needs a well-formed symbol; plan-based commands check the plan too.
  make_observable(c);
  if (c.trials < 1) throw ConfigError("cli_io: trials must be >= 1");

  const auto start = std::chrono::steady_clock::now();
  CommandResult r;
  if (name == "recover") {
    r = cmd_recover(c, c.seed);
  } else if (name == "noise-stats") {
    r = cmd_noise_stats(c, c.seed, c.trials, options.workers);
  } else if (name == "variance-scaling") {
    r = cmd_variance(c, c.seed, c.trials, options.workers);
  } else if (name == "nonconvergence") {
    r = cmd_nonconvergence(c, c.seed, c.trials, options.workers);
  } else if (name == "rate") {
    r = cmd_rate(c, c.seed, c.trials, options.workers);
  } else if (name == "asymptotics") {
    r = cmd_asymptotics(c, c.seed);
  } else {
    throw ConfigError("cli_io: unknown command '" + name + "'");
  }
  if (options.timing) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& row : r.rows) row.wall_time = secs;
  }
  json summary;
  summary["command"] = name;
  summary["schema_version"] = kResultSchemaVersion;
  summary["seed"] = c.seed;
  summary["config_hash"] = config_hash(c);
  for (auto& [k, v] : r.summary.items()) summary[k] = v;
  r.summary = std::move(summary);
  return r;
}

int run_command(const std::string& name, const std::string& config_path,
                const RunOptions& options, std::ostream& log, std::ostream& err) {
  try {
    ExperimentConfig c = load_config(config_path);
    if (options.seed) c.seed = *options.seed;
    if (options.out) c.out = *options.out;
    if (options.trials) c.trials = *options.trials;
    const CommandResult r = execute(name, c, options);
    const std::filesystem::path dir(c.out);
    write_text(dir / (name + ".csv"), to_csv(r.rows));
    write_text(dir / (name + ".summary.json"), r.summary.dump(2) + "\n");
    json manifest;
    manifest["command"] = name;
    manifest["version"] = WPROBE_VERSION;
    manifest["seed"] = c.seed;
    manifest["config_hash"] = config_hash(c);
    manifest["config"] = serialize_config(c);
    write_text(dir / (name + ".manifest.json"), manifest.dump(2) + "\n");
    for (const auto& w : emit_plot_data(dir / "plots", r.plots)) err << "warning: " << w << "\n";
    if (!options.quiet) {
      log << name << ": " << r.rows.size() << " rows written to " << (dir / (name + ".csv")).string()
          << "\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace wprobe
