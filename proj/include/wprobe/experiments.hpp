#pragma once

#include <cstdint>
#include <exception>
#include <memory>
#include <span>
#include <vector>

#include "wprobe/recovery.hpp"
#include "wprobe/stats.hpp"

namespace wprobe {

/// Runs body(i) for i in [0, n) on `workers` threads (0: OpenMP default) and
/// returns the results in index order.
template <class R, class F>
std::vector<R> run_trials(std::size_t n, int workers, F&& body);

enum class VarianceTarget { Plain, Averaged };

/// Single-term setting used by the noise experiments.
struct NoiseSetting {
  VarianceTarget target = VarianceTarget::Plain;
  double beta = 0.0;
  double m = 1.0;
  double lambda = 2.0;
  std::size_t K = 64;
  double x0 = 0.0;
  double xi0 = 1.0;
};

struct VariancePoint {
  double T = 0.0;
  double variance = 0.0;   // Monte Carlo
  double stderr_var = 0.0;
  double exact = 0.0;      // kernel value: N^{-2 lambda m} ||f_N||_beta^4 or w^T C w
};

struct VarianceScalingResult {
  NoiseSetting setting;
  std::vector<VariancePoint> points;
  SlopeRegression fit;        // log variance against log T
  double expected_slope = 0.0;
};

/// Exact standard deviation of the rescaled noise at T in the discrete model.
double noise_sd(const NoiseSetting& setting, double T);

/// -2 lambda (m - 2 beta) for the plain target, 2 lambda (2 beta - 1/2 - m) + 1 for
/// the averaged one.
double expected_variance_slope(const NoiseSetting& s);

/// Monte Carlo variance of the rescaled noise along T_grid. Throws ConfigError
/// unless trials >= 1000, T_grid is geometric with >= 4 points and, for the
/// averaged target, T > 2^{1/(lambda-1)}.
VarianceScalingResult variance_scaling_experiment(const NoiseSetting& setting,
                                                  std::span<const double> T_grid,
                                                  std::size_t trials, std::uint64_t seed,
                                                  int workers = 0);

/// P{|estimate - a| > c} for a single constant term a |xi|^m along a grid.
/// Throws ConfigError outside the failure regime (m > 2 beta for plain,
/// m > 2 beta - 1/2 for averaged).
DeviationCurve nonconvergence_experiment(const NoiseSetting& setting, double amplitude, double c,
                                         std::span<const double> grid, std::size_t trials,
                                         std::uint64_t seed, int workers = 0);

struct RateSetting {
  MeasurementModel model;
  OrderPlan plan;
  std::size_t j = 1;
  std::size_t K = 64;
  std::vector<double> N_grid;
  std::size_t trials = 1000;
};

/// Errors |estimate - a_j(x0, xi0)| for every (N, trial), computed once and reused
/// for any (epsilon, delta).
class RateSampler {
 public:
  RateSampler(const RateSetting& setting, std::uint64_t seed, int workers = 0);
  const std::vector<double>& N_grid() const { return N_grid_; }
  /// Success counts at each N for the given epsilon.
  std::vector<RatePoint> rates(double epsilon) const;
  /// Smallest grid N such that at it and every larger grid N the Wilson lower
  /// bound of the success rate exceeds 1 - delta; 0 when there is none.
  double N0(double epsilon, double delta) const;

 private:
  std::vector<double> N_grid_;
  std::vector<std::vector<double>> errors_;  // [N index][trial]
};

/// N0 at (epsilon, delta), re-verified on fresh seeds, plus the fitted (C, theta)
/// over epsilon in {eps, eps/2, eps/4} and delta in {delta, delta/2, delta/4}
/// (those points with a finite N0). Throws ConfigError when trials < 20 / delta
/// or no grid N reaches the target.
RateCertificate rate_certificate_experiment(const RateSetting& setting, double epsilon,
                                            double delta, std::uint64_t seed, int workers = 0);

struct TrajectoryPoint {
  double N = 0.0;
  cplx estimate;
  double error = 0.0;
  double tube = 0.0;
  bool inside = false;
};

struct TrajectoryResult {
  std::uint64_t seed = 0;
  std::vector<TrajectoryPoint> points;
  bool pass = false;
};

struct TrajectorySetting {
  MeasurementModel model;
  TermSetup term;
  EstimatorMode mode = EstimatorMode::Plain;
  std::vector<double> N_sequence;  // increasing
  std::size_t K = 64;
  double theta = 0.5;              // tube b_N = N^{-theta}
  double burn_in = 0.0;            // only N >= burn_in is checked
};

/// Tube exponent: half the decay rate of the noise standard deviation,
/// 0.5 lambda (m - 2 beta) (plain) or 0.5 (lambda (m - 2 beta + 1/2) - 1/2) (averaged).
double default_tube_exponent(EstimatorMode mode, double m, double beta, double lambda);

/// One white-noise realization shared by all N of the sequence: the noise
/// values of every packet used along the trajectory are sampled jointly.
class TrajectoryEngine {
 public:
  explicit TrajectoryEngine(TrajectorySetting setting);
  TrajectoryResult run(std::uint64_t seed) const;
  const NoiseKernel& kernel() const { return *kernel_; }

 private:
  TrajectorySetting s_;
  cplx truth_;
  std::vector<cplx> signals_;
  // noise of point i = sum over (index, weight) pairs of weight * path[index]
  std::vector<std::vector<std::pair<std::size_t, double>>> taps_;
  std::shared_ptr<const NoiseKernel> kernel_;
};

TrajectoryResult trajectory_as_convergence_check(const TrajectorySetting& setting,
                                                 std::uint64_t seed);

}  // namespace wprobe

#include <omp.h>

namespace wprobe {

template <class R, class F>
std::vector<R> run_trials(std::size_t n, int workers, F&& body) {
  std::vector<R> out(n);
  const int threads = workers > 0 ? workers : omp_get_max_threads();
  const auto count = static_cast<long long>(n);
  // Exceptions may not leave an OpenMP region; the first one is rethrown.
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(wprobe_trial_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace wprobe
