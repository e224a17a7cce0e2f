#include "wprobe/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <map>
#include <string>

#include "wprobe/errors.hpp"
#include "wprobe/rng.hpp"

namespace wprobe {

namespace {

MeasurementModel single_term_model(const NoiseSetting& s, double amplitude) {
  HomogeneousTerm term;
  term.order = s.m;
  term.coefficient = ProductCoefficient{Expression::constant(amplitude), 1.0, 1.0};
  MeasurementModel model;
  model.observable.symbol = SymbolExpansion({term});
  model.beta = s.beta;
  model.family.x0 = s.x0;
  model.family.xi0 = s.xi0;
  model.family.lambda = s.lambda;
  model.noisy = true;
  return model;
}

void check_setting(const NoiseSetting& s) {
  if (!std::isfinite(s.beta) || !std::isfinite(s.m)) {
    throw ConfigError("stats_harness: beta and m must be finite");
  }
  if (!(s.lambda > 1.0)) throw ConfigError("stats_harness: lambda must be > 1");
}

// One estimator of either kind; both are immutable once built.
struct NoiseEstimator {
  std::optional<PlainEstimator> plain;
  std::optional<AveragedEstimator> averaged;

  NoiseEstimator(const MeasurementModel& model, const NoiseSetting& s, double T) {
    const TermSetup term{1, s.m, s.lambda};
    if (s.target == VarianceTarget::Plain) {
      plain.emplace(model, term, T);
    } else {
      averaged.emplace(model, term, T, s.K);
    }
  }
  cplx noise(std::uint64_t seed) const { return plain ? plain->noise(seed) : averaged->noise(seed); }
  cplx estimate(std::uint64_t seed) const {
    return plain ? plain->estimate(seed) : averaged->estimate(seed);
  }
  double variance() const {
    return plain ? plain->noise_sd() * plain->noise_sd() : averaged->noise_variance();
  }
};

Purpose noise_purpose(VarianceTarget t) {
  return t == VarianceTarget::Plain ? Purpose::PlainNoise : Purpose::AveragedNoise;
}

}  // namespace

double noise_sd(const NoiseSetting& setting, double T) {
  check_setting(setting);
  return std::sqrt(NoiseEstimator(single_term_model(setting, 0.0), setting, T).variance());
}

double expected_variance_slope(const NoiseSetting& s) {
  if (s.target == VarianceTarget::Plain) return -2.0 * s.lambda * (s.m - 2.0 * s.beta);
  return 2.0 * s.lambda * (2.0 * s.beta - 0.5 - s.m) + 1.0;
}

VarianceScalingResult variance_scaling_experiment(const NoiseSetting& setting,
                                                  std::span<const double> T_grid,
                                                  std::size_t trials, std::uint64_t seed,
                                                  int workers) {
  check_setting(setting);
  if (trials < 1000) throw ConfigError("stats_harness: variance scaling needs trials >= 1000");
  if (T_grid.size() < 4) throw ConfigError("stats_harness: T grid needs at least 4 points");
  const double ratio = T_grid[1] / T_grid[0];
  for (std::size_t i = 1; i < T_grid.size(); ++i) {
    if (!(T_grid[i] > T_grid[i - 1]) ||
        std::abs(T_grid[i] / T_grid[i - 1] - ratio) > 1e-9 * ratio) {
      throw ConfigError("stats_harness: T grid must be geometric and increasing");
    }
  }
  if (setting.target == VarianceTarget::Averaged &&
      !(T_grid[0] > std::pow(2.0, 1.0 / (setting.lambda - 1.0)))) {
    throw ConfigError("stats_harness: averaged target needs T > 2^{1/(lambda-1)}");
  }
  const MeasurementModel model = single_term_model(setting, 0.0);
  VarianceScalingResult out;
  out.setting = setting;
  out.expected_slope = expected_variance_slope(setting);
  std::vector<double> ts;
  std::vector<double> vs;
  for (std::size_t g = 0; g < T_grid.size(); ++g) {
    const NoiseEstimator est(model, setting, T_grid[g]);
    const auto samples = run_trials<cplx>(trials, workers, [&](std::size_t i) {
      return est.noise(derive_seed(seed, i, noise_purpose(setting.target), g));
    });
    const MeanEstimate v = complex_variance(samples);
    out.points.push_back({T_grid[g], v.mean, v.stderr_mean, est.variance()});
    ts.push_back(T_grid[g]);
    vs.push_back(v.mean);
  }
  out.fit = fit_loglog(ts, vs);
  return out;
}

DeviationCurve nonconvergence_experiment(const NoiseSetting& setting, double amplitude, double c,
                                         std::span<const double> grid, std::size_t trials,
                                         std::uint64_t seed, int workers) {
  check_setting(setting);
  if (!(c > 0.0)) throw ConfigError("stats_harness: deviation threshold c must be > 0");
  if (trials < 1) throw ConfigError("stats_harness: nonconvergence needs trials >= 1");
  if (grid.empty()) throw ConfigError("stats_harness: nonconvergence grid is empty");
  const bool plain = setting.target == VarianceTarget::Plain;
  if (plain && !(setting.m <= 2.0 * setting.beta)) {
    throw ConfigError("stats_harness: plain non-convergence needs m <= 2 beta");
  }
  if (!plain && !(setting.m <= 2.0 * setting.beta - 0.5)) {
    throw ConfigError("stats_harness: averaged non-convergence needs m <= 2 beta - 1/2");
  }
  const MeasurementModel model = single_term_model(setting, amplitude);
  DeviationCurve curve;
  curve.c = c;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const NoiseEstimator est(model, setting, grid[g]);
    const auto hits = run_trials<char>(trials, workers, [&](std::size_t i) -> char {
      const cplx e = est.estimate(derive_seed(seed, i, noise_purpose(setting.target), g));
      return std::abs(e - amplitude) > c ? 1 : 0;
    });
    const auto exceed = static_cast<std::size_t>(std::count(hits.begin(), hits.end(), 1));
    DeviationPoint p;
    p.parameter = grid[g];
    p.exceed = exceed;
    p.trials = trials;
    p.interval = wilson(exceed, trials);
    p.sigma2 = est.variance();
    p.closed_form = std::exp(-c * c / p.sigma2);
    curve.points.push_back(p);
  }
  return curve;
}

RateSampler::RateSampler(const RateSetting& s, std::uint64_t seed, int workers)
    : N_grid_(s.N_grid) {
  if (N_grid_.empty()) throw ConfigError("stats_harness: rate search grid is empty");
  for (std::size_t i = 1; i < N_grid_.size(); ++i) {
    if (!(N_grid_[i] > N_grid_[i - 1])) {
      throw ConfigError("stats_harness: rate search grid must be increasing");
    }
  }
  if (s.trials < 1) throw ConfigError("stats_harness: rate certificate needs trials >= 1");
  if (s.j < 1 || s.j > s.plan.k_beta) {
    throw ConfigError("stats_harness: rate certificate term must lie in 1..k_beta");
  }
  const TermSetup term{s.j, s.model.observable.symbol.order(s.j - 1), s.plan.lambda_of(s.j)};
  const bool plain = s.plan.mode_of(s.j) == EstimatorMode::Plain;
  const cplx truth = s.model.observable.symbol.terms()[s.j - 1](s.model.family.x0,
                                                                s.model.family.xi0);
  for (std::size_t n = 0; n < N_grid_.size(); ++n) {
    const double N = N_grid_[n];
    std::optional<PlainEstimator> pe;
    std::optional<AveragedEstimator> ae;
    if (plain) {
      pe.emplace(s.model, term, N);
    } else {
      ae.emplace(s.model, term, N, s.K);
    }
    const Purpose purpose = plain ? Purpose::PlainNoise : Purpose::AveragedNoise;
    errors_.push_back(run_trials<double>(s.trials, workers, [&](std::size_t i) {
      const std::uint64_t sd = derive_seed(seed, i, purpose, n);
      return std::abs((plain ? pe->estimate(sd) : ae->estimate(sd)) - truth);
    }));
  }
}

std::vector<RatePoint> RateSampler::rates(double epsilon) const {
  std::vector<RatePoint> out;
  for (std::size_t n = 0; n < N_grid_.size(); ++n) {
    const auto& e = errors_[n];
    const auto ok = static_cast<std::size_t>(
        std::count_if(e.begin(), e.end(), [&](double v) { return v <= epsilon; }));
    out.push_back({N_grid_[n], ok, e.size(), wilson(ok, e.size())});
  }
  return out;
}

double RateSampler::N0(double epsilon, double delta) const {
  const auto r = rates(epsilon);
  double n0 = 0.0;
  for (std::size_t n = r.size(); n-- > 0;) {
    if (!(r[n].interval.lower > 1.0 - delta)) break;
    n0 = r[n].N;
  }
  return n0;
}

RateCertificate rate_certificate_experiment(const RateSetting& setting, double epsilon,
                                            double delta, std::uint64_t seed, int workers) {
  if (!(epsilon > 0.0)) throw ConfigError("stats_harness: epsilon must be > 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("stats_harness: delta must be in (0, 1]");
  if (static_cast<double>(setting.trials) < 20.0 / delta) {
    throw ConfigError("stats_harness: rate certificate needs trials >= 20 / delta");
  }
  const RateSampler sampler(setting, seed, workers);
  RateCertificate cert;
  cert.epsilon = epsilon;
  cert.delta = delta;
  cert.search = sampler.rates(epsilon);
  cert.N0 = sampler.N0(epsilon, delta);
  if (cert.N0 == 0.0) {
    throw ConfigError("stats_harness: no N in the search grid reaches success rate 1 - delta = " +
                      std::to_string(1.0 - delta) + " at epsilon = " + std::to_string(epsilon) +
                      "; extend the grid");
  }
  RateSetting fresh = setting;
  fresh.N_grid.clear();
  for (double N : setting.N_grid) {
    if (N >= cert.N0) fresh.N_grid.push_back(N);
  }
  const RateSampler verify(fresh, derive_seed(seed, 0, Purpose::Verification), workers);
  cert.verification = verify.rates(epsilon);

  std::vector<SurfacePoint> surface;
  for (double fe : {1.0, 0.5, 0.25}) {
    for (double fd : {1.0, 0.5, 0.25}) {
      const double d = delta * fd;
      if (static_cast<double>(setting.trials) < 20.0 / d) continue;
      const double n0 = sampler.N0(epsilon * fe, d);
      if (n0 > 0.0) surface.push_back({epsilon * fe, d, n0});
    }
  }
  cert.surface = surface;
  if (surface.size() >= 2) {
    std::tie(cert.C_emp, cert.theta_emp) = fit_rate_surface(surface);
  } else {
    cert.C_emp = cert.N0 * epsilon;
    cert.theta_emp = 1.0;
  }
  return cert;
}

double default_tube_exponent(EstimatorMode mode, double m, double beta, double lambda) {
  if (mode == EstimatorMode::Plain) return 0.5 * lambda * (m - 2.0 * beta);
  return 0.5 * (lambda * (m - 2.0 * beta + 0.5) - 0.5);
}

TrajectoryEngine::TrajectoryEngine(TrajectorySetting setting) : s_(std::move(setting)) {
  const auto& seq = s_.N_sequence;
  if (seq.empty()) throw ConfigError("stats_harness: trajectory needs at least one N");
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (!(seq[i] > seq[i - 1])) throw ConfigError("stats_harness: N sequence must increase");
  }
  const auto& sym = s_.model.observable.symbol;
  if (s_.term.j < 1 || s_.term.j > sym.size()) {
    throw ConfigError("stats_harness: trajectory term index outside the expansion");
  }
  truth_ = sym.terms()[s_.term.j - 1](s_.model.family.x0, s_.model.family.xi0);
  const double mexp = -s_.term.lambda * s_.term.order;
  std::map<double, std::size_t> index;
  std::vector<std::vector<std::pair<double, double>>> raw(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const double N = seq[i];
    if (s_.mode == EstimatorMode::Plain) {
      signals_.push_back(std::pow(N, mexp) *
                         signal(s_.model, N, s_.term.lambda, s_.term.j));
      raw[i].emplace_back(N, std::pow(N, mexp));
      index.emplace(N, 0);
    } else {
      signals_.push_back(averaged_signal(s_.model, s_.term, N, s_.K));
      const NoiseQuadrature q = averaged_noise_quadrature(s_.term, N, s_.K);
      for (std::size_t k = 0; k < q.nodes.size(); ++k) {
        raw[i].emplace_back(q.nodes[k], q.weights[k]);
        index.emplace(q.nodes[k], 0);
      }
    }
  }
  std::vector<double> nodes;
  nodes.reserve(index.size());
  for (auto& [t, idx] : index) {
    idx = nodes.size();
    nodes.push_back(t);
  }
  taps_.resize(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    for (const auto& [t, w] : raw[i]) taps_[i].emplace_back(index.at(t), w);
  }
  WavePacketFamily fam = s_.model.family;
  fam.lambda = s_.term.lambda;
  kernel_ = std::make_shared<const NoiseKernel>(build_kernel(fam, nodes, s_.model.beta));
}

TrajectoryResult TrajectoryEngine::run(std::uint64_t seed) const {
  TrajectoryResult out;
  out.seed = seed;
  std::vector<cplx> path(kernel_->size(), cplx{0.0, 0.0});
  if (s_.model.noisy) path = sample_path(*kernel_, derive_seed(seed, 0, Purpose::Trajectory)).values;
  out.pass = true;
  for (std::size_t i = 0; i < s_.N_sequence.size(); ++i) {
    TrajectoryPoint p;
    p.N = s_.N_sequence[i];
    cplx noise{0.0, 0.0};
    for (const auto& [idx, w] : taps_[i]) noise += w * path[idx];
    p.estimate = signals_[i] + noise;
    p.error = std::abs(p.estimate - truth_);
    p.tube = std::pow(p.N, -s_.theta);
    p.inside = p.error <= p.tube;
    if (p.N >= s_.burn_in && !p.inside) out.pass = false;
    out.points.push_back(p);
  }
  return out;
}

TrajectoryResult trajectory_as_convergence_check(const TrajectorySetting& setting,
                                                 std::uint64_t seed) {
  return TrajectoryEngine(setting).run(seed);
}

}  // namespace wprobe
