#include "wprobe/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wprobe/errors.hpp"
#include "wprobe/rng.hpp"

namespace wprobe {

std::string to_string(EstimatorMode m) { return m == EstimatorMode::Plain ? "plain" : "averaged"; }
std::string to_string(SubtractMode m) { return m == SubtractMode::Oracle ? "oracle" : "self"; }

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

WavePacketFamily with_lambda(const WavePacketFamily& family, double lambda) {
  WavePacketFamily f = family;
  f.lambda = lambda;
  f.validate();
  return f;
}

}  // namespace

OrderPlan plan_orders(std::span<const double> m_list, double beta, double margin,
                      std::span<const std::optional<double>> lambda_overrides) {
  if (m_list.empty()) throw ConfigError("measurement_recovery: the order list is empty");
  if (!std::isfinite(beta)) throw ConfigError("measurement_recovery: beta must be finite");
  if (!(margin > 0.0) || !std::isfinite(margin)) {
    throw ConfigError("measurement_recovery: lambda margin must be finite and > 0");
  }
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (!std::isfinite(m_list[i])) throw ConfigError("measurement_recovery: orders must be finite");
    if (i > 0 && !(m_list[i] < m_list[i - 1])) {
      throw ConfigError("measurement_recovery: orders must strictly decrease (m_1 > m_2 > ...)");
    }
  }
  const double plain_cut = 2.0 * beta;
  const double avg_cut = 2.0 * beta - 0.5;
  if (!(m_list[0] > avg_cut)) {
    throw ConfigError("measurement_recovery: m_1 = " + num(m_list[0]) +
                      " must exceed 2 beta - 1/2 = " + num(avg_cut) + "; nothing is recoverable");
  }
  OrderPlan plan;
  plan.m_list.assign(m_list.begin(), m_list.end());
  plan.beta = beta;
  plan.margin = margin;
  // 1-based: m(j) = m_list[j - 1].
  auto m = [&](std::size_t j) { return m_list[j - 1]; };
  std::size_t k = 0;
  for (std::size_t j = 1; j < m_list.size(); ++j) {
    if (m(j + 1) <= avg_cut) {
      k = j;
      break;
    }
  }
  if (k == 0) {
    throw ConfigError("measurement_recovery: the order list must reach an order <= 2 beta - 1/2 = " +
                      num(avg_cut) + " to fix k_beta");
  }
  std::size_t jb = 0;
  while (jb < k && !(m(jb + 1) <= plain_cut)) ++jb;
  plan.j_beta = jb;
  plan.k_beta = k;

  for (std::size_t j = 1; j <= k; ++j) {
    double bound;
    bool strict = false;
    if (j == jb) {
      bound = std::max(1.0 / (m(j) - plain_cut), 2.0);
      strict = true;
    } else if (j == k) {
      bound = std::max(1.0 / (m(j) - avg_cut), 2.0);
      strict = true;
    } else {
      bound = std::max(1.0 / (m(j) - m(j + 1)), 2.0);
    }
    double lam = strict ? bound + margin : bound;
    if (j - 1 < lambda_overrides.size() && lambda_overrides[j - 1]) {
      const double o = *lambda_overrides[j - 1];
      const bool ok = std::isfinite(o) && (strict ? o > bound : o >= bound);
      if (!ok) {
        throw ConfigError("measurement_recovery: lambda override " + num(o) + " for term " +
                          std::to_string(j) + " violates the bound lambda " +
                          (strict ? "> " : ">= ") + num(bound));
      }
      lam = o;
    }
    plan.lambda_bound.push_back(bound);
    plan.lambda.push_back(lam);
    plan.mode.push_back(j <= jb ? EstimatorMode::Plain : EstimatorMode::Averaged);
  }
  return plan;
}

cplx signal(const MeasurementModel& model, double t, double lambda, std::size_t j,
            const Subtraction& sub) {
  const auto& sym = model.observable.symbol;
  if (j < 1 || j > sym.size()) {
    throw ConfigError("measurement_recovery: term index " + std::to_string(j) +
                      " outside the expansion");
  }
  const WavePacketFamily fam = with_lambda(model.family, lambda);
  const SpectralPatch f = make_packet(fam, t);
  const PhysicalGrid grid = packet_grid(fam, t, f.window());

  std::vector<HomogeneousTerm> plus;
  std::vector<HomogeneousTerm> minus;
  if (sub.mode == SubtractMode::Oracle) {
    plus.assign(sym.terms().begin() + static_cast<std::ptrdiff_t>(j - 1), sym.terms().end());
  } else {
    if (sub.reconstructed.size() < j - 1) {
      throw ConfigError("measurement_recovery: self-subtraction needs the first j - 1 terms");
    }
    plus = sym.terms();
    minus.assign(sub.reconstructed.begin(),
                 sub.reconstructed.begin() + static_cast<std::ptrdiff_t>(j - 1));
  }
  cplx acc{0.0, 0.0};
  for (const auto& v : quadratic_form_terms(f, plus, grid)) acc += v;
  if (!minus.empty()) {
    for (const auto& v : quadratic_form_terms(f, minus, grid)) acc -= v;
  }
  if (sym.remainder()) acc += quadratic_form(f, *sym.remainder(), grid);
  return acc;
}

cplx measure(const MeasurementModel& model, double t, double lambda, std::size_t j,
             cplx noise_value, const Subtraction& sub) {
  return signal(model, t, lambda, j, sub) + noise_value;
}

PlainEstimator::PlainEstimator(const MeasurementModel& model, TermSetup term, double N,
                               const Subtraction& sub)
    : noisy_(model.noisy), N_(N) {
  if (!(N >= 1.0)) throw ConfigError("measurement_recovery: N must be >= 1");
  const double scale = std::pow(N, -term.lambda * term.order);
  signal_ = scale * wprobe::signal(model, N, term.lambda, term.j, sub);
  const double nodes[1] = {N};
  kernel_ = std::make_shared<const NoiseKernel>(
      build_kernel(with_lambda(model.family, term.lambda), nodes, model.beta));
  noise_sd_ = scale * std::sqrt((*kernel_)(0, 0));
  signal_scale_ = scale;
}

cplx PlainEstimator::noise(std::uint64_t seed) const {
  if (!noisy_) return {0.0, 0.0};
  return signal_scale_ * sample_path(*kernel_, seed).values[0];
}

cplx PlainEstimator::estimate(std::uint64_t seed) const { return signal_ + noise(seed); }

std::size_t noise_node_count(double N, double lambda, std::size_t K) {
  constexpr double kNodesPerLength = 2.0;
  const double widest = std::max(std::pow(N, lambda - 2.0), std::pow(2.0 * N, lambda - 2.0));
  const double need = std::ceil(kNodesPerLength * lambda * widest * N);
  return std::max(K, static_cast<std::size_t>(need));
}

cplx averaged_signal(const MeasurementModel& model, TermSetup term, double N, std::size_t K,
                     const Subtraction& sub) {
  if (!(N >= 1.0)) throw ConfigError("measurement_recovery: N must be >= 1");
  if (K < 2) throw ConfigError("measurement_recovery: the t-average needs K >= 2 nodes");
  const double mexp = -term.lambda * term.order;
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < K; ++k) {
    const double t = N + N * (static_cast<double>(k) + 0.5) / static_cast<double>(K);
    acc += std::pow(t, mexp) * signal(model, t, term.lambda, term.j, sub);
  }
  return acc / static_cast<double>(K);
}

NoiseQuadrature averaged_noise_quadrature(TermSetup term, double N, std::size_t K) {
  if (!(N >= 1.0)) throw ConfigError("measurement_recovery: N must be >= 1");
  const std::size_t kn = noise_node_count(N, term.lambda, K);
  NoiseQuadrature q;
  q.nodes.resize(kn);
  q.weights.resize(kn);
  for (std::size_t k = 0; k < kn; ++k) {
    q.nodes[k] = N + N * (static_cast<double>(k) + 0.5) / static_cast<double>(kn);
    q.weights[k] = std::pow(q.nodes[k], -term.lambda * term.order) / static_cast<double>(kn);
  }
  return q;
}

AveragedEstimator::AveragedEstimator(const MeasurementModel& model, TermSetup term, double N,
                                     std::size_t K, const Subtraction& sub,
                                     std::shared_ptr<const NoiseKernel> kernel)
    : noisy_(model.noisy), N_(N) {
  signal_ = averaged_signal(model, term, N, K, sub);
  signal_nodes_.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    signal_nodes_[k] = N + N * (static_cast<double>(k) + 0.5) / static_cast<double>(K);
  }
  NoiseQuadrature q = averaged_noise_quadrature(term, N, K);
  weights_ = std::move(q.weights);
  if (kernel) {
    if (kernel->size() != q.nodes.size() || kernel->nodes().front() != q.nodes.front() ||
        kernel->beta() != model.beta) {
      throw ConfigError("measurement_recovery: shared kernel does not match the noise nodes");
    }
    kernel_ = std::move(kernel);
  } else {
    kernel_ = std::make_shared<const NoiseKernel>(
        build_kernel(with_lambda(model.family, term.lambda), q.nodes, model.beta));
  }
}

cplx AveragedEstimator::noise(std::uint64_t seed) const {
  if (!noisy_) return {0.0, 0.0};
  const NoisePath p = sample_path(*kernel_, seed);
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < weights_.size(); ++k) acc += weights_[k] * p.values[k];
  return acc;
}

cplx AveragedEstimator::estimate(std::uint64_t seed) const { return signal_ + noise(seed); }

double AveragedEstimator::noise_variance() const { return kernel_->quadratic(weights_); }

namespace {

TermSetup setup_for(const MeasurementModel& model, const OrderPlan& plan, std::size_t j) {
  if (j < 1 || j > plan.k_beta) {
    throw ConfigError("measurement_recovery: term " + std::to_string(j) +
                      " is outside the recoverable range 1..k_beta = " +
                      std::to_string(plan.k_beta));
  }
  if (j > model.observable.symbol.size()) {
    throw ConfigError("measurement_recovery: the observable has fewer than " + std::to_string(j) +
                      " terms");
  }
  return TermSetup{j, model.observable.symbol.order(j - 1), plan.lambda_of(j)};
}

}  // namespace

cplx plain_estimate(const MeasurementModel& model, const OrderPlan& plan, std::size_t j, double N,
                    std::uint64_t seed, const Subtraction& sub) {
  const TermSetup s = setup_for(model, plan, j);
  if (plan.mode_of(j) != EstimatorMode::Plain) {
    throw ConfigError("measurement_recovery: term " + std::to_string(j) +
                      " needs the averaged estimator (j > j_beta = " +
                      std::to_string(plan.j_beta) + ")");
  }
  return PlainEstimator(model, s, N, sub).estimate(seed);
}

cplx averaged_estimate(const MeasurementModel& model, const OrderPlan& plan, std::size_t j,
                       double N, std::size_t K, std::uint64_t seed, const Subtraction& sub) {
  const TermSetup s = setup_for(model, plan, j);
  if (plan.mode_of(j) != EstimatorMode::Averaged) {
    throw ConfigError("measurement_recovery: term " + std::to_string(j) +
                      " is in the plain range (j <= j_beta = " + std::to_string(plan.j_beta) +
                      ")");
  }
  return AveragedEstimator(model, s, N, K, sub).estimate(seed);
}

std::vector<TermEstimate> EstimatorReport::select(SubtractMode mode, std::size_t j) const {
  std::vector<TermEstimate> out;
  for (const auto& r : rows) {
    if (r.subtract == mode && r.j == j) out.push_back(r);
  }
  return out;
}

bool EstimatorReport::any_alert() const {
  return std::any_of(rows.begin(), rows.end(), [](const TermEstimate& r) { return r.alert; });
}

struct RecoveryEngine::Slot {
  std::optional<PlainEstimator> plain;
  std::optional<AveragedEstimator> averaged;

  cplx signal() const { return plain ? plain->signal() : averaged->signal(); }
  cplx noise(std::uint64_t seed) const { return plain ? plain->noise(seed) : averaged->noise(seed); }
};

RecoveryEngine::RecoveryEngine(MeasurementModel model, OrderPlan plan, std::vector<double> x0_grid,
                               double xi0, RecoveryOptions options)
    : model_(std::move(model)),
      plan_(std::move(plan)),
      x0_grid_(std::move(x0_grid)),
      xi0_(xi0),
      options_(std::move(options)) {
  if (x0_grid_.empty()) throw ConfigError("measurement_recovery: x0 grid is empty");
  if (std::abs(xi0_) != 1.0) throw ConfigError("measurement_recovery: xi0 must be -1 or +1");
  if (options_.modes.empty()) throw ConfigError("measurement_recovery: no subtraction mode given");
  const bool self = std::find(options_.modes.begin(), options_.modes.end(), SubtractMode::Self) !=
                    options_.modes.end();
  if (self) {
    for (std::size_t i = 1; i < x0_grid_.size(); ++i) {
      if (!(x0_grid_[i] > x0_grid_[i - 1])) {
        throw ConfigError("measurement_recovery: self-subtraction needs an increasing x0 grid");
      }
    }
  }
  if (model_.observable.symbol.size() < plan_.k_beta) {
    throw ConfigError("measurement_recovery: the observable has fewer terms than k_beta = " +
                      std::to_string(plan_.k_beta));
  }
  const std::size_t kb = plan_.k_beta;
  kernels_.resize(kb);
  oracle_.resize(x0_grid_.size() * kb);
  for (std::size_t j = 1; j <= kb; ++j) {
    const TermSetup s = setup_for(model_, plan_, j);
    for (std::size_t xi = 0; xi < x0_grid_.size(); ++xi) {
      MeasurementModel m = model_;
      m.family.x0 = x0_grid_[xi];
      m.family.xi0 = xi0_;
      auto slot = std::make_shared<Slot>();
      if (plan_.mode_of(j) == EstimatorMode::Plain) {
        slot->plain.emplace(m, s, term_N(j));
      } else {
        slot->averaged.emplace(m, s, term_N(j), options_.K, Subtraction{}, kernels_[j - 1]);
        if (!kernels_[j - 1]) {
          kernels_[j - 1] = std::shared_ptr<const NoiseKernel>(slot, &slot->averaged->kernel());
        }
      }
      oracle_[xi * kb + j - 1] = std::move(slot);
    }
  }
}

double RecoveryEngine::term_N(std::size_t j) const {
  if (j - 1 < options_.N_per_term.size()) return options_.N_per_term[j - 1];
  return options_.N;
}

cplx RecoveryEngine::truth(std::size_t j, double x0) const {
  return model_.observable.symbol.terms()[j - 1](x0, xi0_);
}

HomogeneousTerm RecoveryEngine::reconstruct(std::size_t j, const std::vector<cplx>& values) const {
  HomogeneousTerm q;
  q.order = plan_.m_list[j - 1];
  q.cutoff = model_.observable.symbol.terms()[j - 1].cutoff;
  // Packets with xi0 = +1 (-1) only see positive (negative) frequencies, so
  // both sides of the table hold the values measured at xi0.
  q.coefficient = TabulatedCoefficient(x0_grid_, values, values);
  return q;
}

EstimatorReport RecoveryEngine::run(std::uint64_t seed) const {
  EstimatorReport report;
  report.plan = plan_;
  const std::size_t kb = plan_.k_beta;
  for (SubtractMode mode : options_.modes) {
    std::vector<HomogeneousTerm> recon;
    for (std::size_t j = 1; j <= kb; ++j) {
      std::vector<cplx> values(x0_grid_.size());
      for (std::size_t xi = 0; xi < x0_grid_.size(); ++xi) {
        const Slot& slot = *oracle_[xi * kb + j - 1];
        const std::uint64_t noise_seed =
            derive_seed(seed, xi, plan_.mode_of(j) == EstimatorMode::Plain ? Purpose::PlainNoise
                                                                           : Purpose::AveragedNoise,
                        j);
        cplx sig = slot.signal();
        if (mode == SubtractMode::Self && j > 1) {
          MeasurementModel m = model_;
          m.family.x0 = x0_grid_[xi];
          m.family.xi0 = xi0_;
          const TermSetup s = setup_for(model_, plan_, j);
          const Subtraction sub{SubtractMode::Self, recon};
          if (slot.plain) {
            sig = std::pow(term_N(j), -s.lambda * s.order) * signal(m, term_N(j), s.lambda, j, sub);
          } else {
            sig = averaged_signal(m, s, term_N(j), options_.K, sub);
          }
        }
        TermEstimate r;
        r.j = j;
        r.x0 = x0_grid_[xi];
        r.xi0 = xi0_;
        r.N = term_N(j);
        r.lambda = plan_.lambda_of(j);
        r.mode = plan_.mode_of(j);
        r.subtract = mode;
        r.estimate = sig + slot.noise(noise_seed);
        r.truth = truth(j, r.x0);
        r.error = std::abs(r.estimate - r.truth);
        r.seed = seed;
        r.alert = r.error > options_.alert_threshold;
        values[xi] = r.estimate;
        report.rows.push_back(r);
      }
      if (mode == SubtractMode::Self) recon.push_back(reconstruct(j, values));
    }
  }
  return report;
}

EstimatorReport recover_expansion(const MeasurementModel& model, const OrderPlan& plan,
                                  std::span<const double> x0_grid, double xi0,
                                  const RecoveryOptions& options, std::uint64_t seed) {
  return RecoveryEngine(model, plan, std::vector<double>(x0_grid.begin(), x0_grid.end()), xi0,
                        options)
      .run(seed);
}

}  // namespace wprobe
