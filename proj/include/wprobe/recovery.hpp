#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wprobe/noise.hpp"
#include "wprobe/symbols.hpp"
#include "wprobe/wave_packets.hpp"

namespace wprobe {

/// N_{beta,P}(f, g) = (f | P g) + E_beta(f, g) with unit noise scale.
/// The family's lambda is ignored; each term carries its own.
struct MeasurementModel {
  Observable observable;
  double beta = 0.0;
  WavePacketFamily family;
  bool noisy = true;
};

enum class EstimatorMode { Plain, Averaged };
enum class SubtractMode { Oracle, Self };

std::string to_string(EstimatorMode m);
std::string to_string(SubtractMode m);

struct OrderPlan {
  std::vector<double> m_list;
  double beta = 0.0;
  std::size_t j_beta = 0;
  std::size_t k_beta = 1;
  double margin = 0.5;
  /// Entry j - 1 describes term j, for j = 1 .. k_beta.
  std::vector<double> lambda_bound;
  std::vector<double> lambda;
  std::vector<EstimatorMode> mode;

  double lambda_of(std::size_t j) const { return lambda.at(j - 1); }
  EstimatorMode mode_of(std::size_t j) const { return mode.at(j - 1); }
};

/// k_beta = min{j >= 1 : m_{j+1} <= 2 beta - 1/2}, j_beta = min{j >= 0 : m_{j+1} <= 2 beta}.
/// lambda_j = max(1/(m_j - m_{j+1}), 2) away from the boundaries; at j_beta and
/// k_beta the bound max(1/(m_j - 2 beta), 2), resp. max(1/(m_j - 2 beta + 1/2), 2),
/// must be exceeded strictly and lambda = bound + margin. An override replaces
/// the chosen value and must respect the same (strict) bound.
/// Throws ConfigError when m_1 <= 2 beta - 1/2, orders do not strictly decrease,
/// or the list stops before an order <= 2 beta - 1/2.
OrderPlan plan_orders(std::span<const double> m_list, double beta, double margin = 0.5,
                      std::span<const std::optional<double>> lambda_overrides = {});

/// Terms Q_1 .. Q_{j-1} subtracted from P before estimating a_j: the exact
/// terms of the observable (oracle) or reconstructed ones.
struct Subtraction {
  SubtractMode mode = SubtractMode::Oracle;
  std::vector<HomogeneousTerm> reconstructed;
};

/// (f_t | P_j f_t) with P_j = P - sum_{k<j} Q_k (j is 1-based).
cplx signal(const MeasurementModel& model, double t, double lambda, std::size_t j,
            const Subtraction& sub = {});

/// signal(...) + noise_value.
cplx measure(const MeasurementModel& model, double t, double lambda, std::size_t j,
             cplx noise_value, const Subtraction& sub = {});

/// Which term is estimated and how the packets are scaled.
struct TermSetup {
  std::size_t j = 1;
  double order = 0.0;
  double lambda = 2.0;
};

/// N^{-lambda m} N_{beta,P_j}(f_N, f_N); the deterministic part is computed once.
class PlainEstimator {
 public:
  PlainEstimator(const MeasurementModel& model, TermSetup term, double N,
                 const Subtraction& sub = {});

  double N() const { return N_; }
  cplx signal() const { return signal_; }
  /// Standard deviation of the rescaled noise, N^{-lambda m} ||f_N||_beta^2.
  double noise_sd() const { return noise_sd_; }
  cplx noise(std::uint64_t seed) const;
  cplx estimate(std::uint64_t seed) const;

 private:
  bool noisy_;
  double N_;
  cplx signal_;
  double signal_scale_;
  double noise_sd_;
  std::shared_ptr<const NoiseKernel> kernel_;
};

/// Number of noise quadrature nodes for an average over [N, 2N]: at least K and
/// enough for two nodes per correlation length t^{2-lambda}/lambda of the noise.
std::size_t noise_node_count(double N, double lambda, std::size_t K);

/// (1/K) sum_k t_k^{-lambda m} (f_{t_k} | P_j f_{t_k}) over the K midpoints of [N, 2N].
cplx averaged_signal(const MeasurementModel& model, TermSetup term, double N, std::size_t K,
                     const Subtraction& sub = {});

/// Midpoint nodes on [N, 2N] and weights t^{-lambda m} / count for the noise integral.
struct NoiseQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
NoiseQuadrature averaged_noise_quadrature(TermSetup term, double N, std::size_t K);

/// (1/N) int_N^{2N} t^{-lambda m} N_{beta,P_j}(f_t, f_t) dt. The signal uses a K-node
/// midpoint rule; the noise integral uses noise_node_count(N, lambda, K) midpoint
/// nodes sampled jointly from one kernel.
class AveragedEstimator {
 public:
  /// `kernel` may be passed in to share one noise kernel between estimators
  /// that differ only in x0 or subtraction (the kernel does not depend on them).
  AveragedEstimator(const MeasurementModel& model, TermSetup term, double N, std::size_t K,
                    const Subtraction& sub = {},
                    std::shared_ptr<const NoiseKernel> kernel = nullptr);

  double N() const { return N_; }
  cplx signal() const { return signal_; }
  cplx noise(std::uint64_t seed) const;
  cplx estimate(std::uint64_t seed) const;
  /// Exact variance of noise() in the discrete model, w^T C w.
  double noise_variance() const;
  const NoiseKernel& kernel() const { return *kernel_; }
  const std::vector<double>& noise_weights() const { return weights_; }
  const std::vector<double>& signal_nodes() const { return signal_nodes_; }

 private:
  bool noisy_;
  double N_;
  cplx signal_;
  std::vector<double> signal_nodes_;
  std::vector<double> weights_;
  std::shared_ptr<const NoiseKernel> kernel_;
};

/// Plan-gated single estimates. Throw ConfigError when term j is not in the
/// plain (j <= j_beta), resp. averaged (j_beta < j <= k_beta), range.
cplx plain_estimate(const MeasurementModel& model, const OrderPlan& plan, std::size_t j, double N,
                    std::uint64_t seed, const Subtraction& sub = {});
cplx averaged_estimate(const MeasurementModel& model, const OrderPlan& plan, std::size_t j,
                       double N, std::size_t K, std::uint64_t seed, const Subtraction& sub = {});

struct RecoveryOptions {
  /// Oracle, Self, or both (rows for each).
  std::vector<SubtractMode> modes{SubtractMode::Oracle};
  double N = 48.0;
  /// Optional per-term N (index j - 1); falls back to N.
  std::vector<double> N_per_term;
  std::size_t K = 64;
  double alert_threshold = std::numeric_limits<double>::infinity();
};

struct TermEstimate {
  std::size_t j = 0;
  double x0 = 0.0;
  double xi0 = 1.0;
  double N = 0.0;
  double lambda = 0.0;
  EstimatorMode mode = EstimatorMode::Plain;
  SubtractMode subtract = SubtractMode::Oracle;
  cplx estimate;
  cplx truth;
  double error = 0.0;
  std::uint64_t seed = 0;
  bool alert = false;
};

struct EstimatorReport {
  OrderPlan plan;
  std::vector<TermEstimate> rows;

  /// Rows for one subtraction mode and term.
  std::vector<TermEstimate> select(SubtractMode mode, std::size_t j) const;
  bool any_alert() const;
};

/// Recovers a_1 .. a_{k_beta} at every x0 of the grid. Deterministic parts are
/// computed once, so run() can be called for many seeds cheaply. Noise for
/// each (x0, term) pair comes from its own stream of the seed.
class RecoveryEngine {
 public:
  RecoveryEngine(MeasurementModel model, OrderPlan plan, std::vector<double> x0_grid, double xi0,
                 RecoveryOptions options);
  EstimatorReport run(std::uint64_t seed) const;

 private:
  struct Slot;  // cached estimators for one (x0, term)
  double term_N(std::size_t j) const;
  cplx truth(std::size_t j, double x0) const;
  HomogeneousTerm reconstruct(std::size_t j, const std::vector<cplx>& values) const;

  MeasurementModel model_;
  OrderPlan plan_;
  std::vector<double> x0_grid_;
  double xi0_;
  RecoveryOptions options_;
  std::vector<std::shared_ptr<const Slot>> oracle_;  // [x index * k_beta + j - 1]
  std::vector<std::shared_ptr<const NoiseKernel>> kernels_;
};

EstimatorReport recover_expansion(const MeasurementModel& model, const OrderPlan& plan,
                                  std::span<const double> x0_grid, double xi0,
                                  const RecoveryOptions& options, std::uint64_t seed);

}  // namespace wprobe
