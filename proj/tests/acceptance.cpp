// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kernel_quadrature.hpp"
#include "wprobe/commands.hpp"
#include "wprobe/config.hpp"
#include "wprobe/experiments.hpp"
#include "wprobe/noise.hpp"
#include "wprobe/report.hpp"
#include "wprobe/rng.hpp"

using namespace wprobe;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

HomogeneousTerm term(double order, const char* c, double h_minus = 1.0, double h_plus = 1.0) {
  HomogeneousTerm t;
  t.order = order;
  t.coefficient = ProductCoefficient{Expression::parse(c), h_minus, h_plus};
  return t;
}

WavePacketFamily family(double lambda, double x0 = 0.0) {
  WavePacketFamily f;
  f.lambda = lambda;
  f.x0 = x0;
  return f;
}

double sobolev_norm(const SpectralPatch& p, double beta) {
  return std::sqrt(inner_product_sobolev(p, p, JapaneseBracketWeight{beta}).real());
}

Eigen::MatrixXcd empirical_cov(const std::vector<std::vector<cplx>>& paths) {
  const auto k = static_cast<Eigen::Index>(paths.front().size());
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(k, k);
  for (const auto& p : paths) {
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) c(i, j) += p[i] * std::conj(p[j]);
    }
  }
  return c / static_cast<double>(paths.size());
}

Outcome packet_norms() {
  double worst = 0.0;
  for (double t : {2.0, 8.0, 32.0}) {
    worst = std::max(worst, std::abs(make_packet(family(2.0), t).l2_norm() - 1.0));
  }
  bool ok = worst < 1e-6;
  std::string detail = fmt("max | ||f_t|| - 1 | = %.2e", worst);
  for (auto [beta, lambda] : {std::pair{0.5, 2.0}, std::pair{-0.5, 2.5}}) {
    const std::vector<double> ts{4, 8, 16, 32, 64};
    std::vector<double> ns;
    for (double t : ts) ns.push_back(sobolev_norm(make_packet(family(lambda), t), beta));
    const double slope = fit_loglog(ts, ns).slope;
    ok = ok && std::abs(slope - lambda * beta) <= 0.05;
    detail += fmt("; slope %.4f (want %.2f)", slope, lambda * beta);
  }
  return {ok, detail};
}

Outcome noise_isometry() {
  const auto fam = family(2.0, 0.1);
  const std::vector<double> nodes{4.0, 4.1, 8.0};
  const std::size_t n = 10000;
  double worst_ratio = 0.0;
  double worst_z = 0.0;
  for (double beta : {0.0, 0.5}) {
    const auto k = build_kernel(fam, nodes, beta);
    std::vector<std::vector<cplx>> paths;
    for (std::size_t i = 0; i < n; ++i) {
      paths.push_back(sample_path(k, derive_seed(101, i, Purpose::NoisePath)).values);
    }
    const auto emp = empirical_cov(paths);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      // E|E(f, f)|^2 against ||f||_beta^2 ||f||_beta^2.
      const double norm2 = std::pow(sobolev_norm(make_packet(fam, nodes[i]), beta), 2);
      worst_ratio = std::max(worst_ratio, std::abs(emp(i, i).real() / (norm2 * norm2) - 1.0));
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        cplx mean{0.0, 0.0};
        for (const auto& p : paths) mean += p[i] * p[j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& p : paths) var += std::norm(p[i] * p[j] - mean);
        const double se = std::sqrt(var / (n - 1.0) / n);
        worst_z = std::max(worst_z, std::abs(mean) / se);
      }
    }
  }
  return {worst_ratio <= 0.05 && worst_z < 3.0,
          fmt("max |ratio - 1| = %.4f; max |pseudo-cov| / se = %.2f", worst_ratio, worst_z)};
}

Outcome kernel_oracle() {
  const auto fam = family(2.0);
  const std::vector<double> nodes{2.0, 2.05, 2.1};
  const double spacing = 0.1;
  const auto k = build_kernel(fam, nodes, 0.0, spacing);
  std::vector<std::vector<cplx>> paths;
  for (std::size_t i = 0; i < 10000; ++i) {
    paths.push_back(
        basis_oracle_sample(fam, nodes, 0.0, 128, spacing, derive_seed(102, i, Purpose::BasisOracle))
            .values);
  }
  const auto emp = empirical_cov(paths);
  double worst = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      worst = std::max(worst, std::abs(emp(i, j) - k(i, j)) / k(i, j));
    }
  }
  return {worst <= 0.05, fmt("max relative deviation %.4f", worst)};
}

Outcome deterministic_rates() {
  const std::vector<double> ts{8, 16, 32, 64};
  bool ok = true;
  std::string detail;
  for (auto [m2, lambda] : {std::pair{0.6, 2.0}, std::pair{0.75, 2.5}}) {
    const Observable P{
        SymbolExpansion({term(1.0, "1 + 0.5*sin(x)", -1.0, 1.0), term(m2, "0.5*cos(x)")})};
    const auto fit = fit_loglog(ts, asymptotic_error_probe(P, family(lambda, 0.3), ts));
    const double expect = -std::min({1.0, lambda * (1.0 - m2), lambda - 1.0});
    ok = ok && std::abs(fit.slope - expect) <= 0.2;
    if (!detail.empty()) detail += "; ";
    detail += fmt("slope %.3f (want %.3f)", fit.slope, expect);
  }
  return {ok, detail};
}

const std::vector<double> kT{8, 16, 32, 64};

Outcome plain_scaling() {
  NoiseSetting s;
  s.m = 1.0;
  s.lambda = 2.0;
  const auto r = variance_scaling_experiment(s, kT, 1000, 105);
  return {std::abs(r.fit.slope - r.expected_slope) <= 0.1,
          fmt("slope %.4f (want %.2f)", r.fit.slope, r.expected_slope)};
}

Outcome averaged_scaling() {
  NoiseSetting s;
  s.target = VarianceTarget::Averaged;
  s.m = 0.0;
  s.lambda = 2.5;
  const auto r = variance_scaling_experiment(s, kT, 1000, 106);
  double worst = 0.0;
  for (const auto& p : r.points) {
    const double q = oracle::averaged_variance(s, p.T);
    worst = std::max(worst, std::abs(p.variance - q) / q);
  }
  return {std::abs(r.fit.slope - r.expected_slope) <= 0.3 && worst <= 0.1,
          fmt("slope %.4f (want %.2f)", r.fit.slope, r.expected_slope) +
              fmt("; max |MC - quadrature| / quadrature = %.4f", worst)};
}

Outcome end_to_end() {
  MeasurementModel m;
  m.observable.symbol = SymbolExpansion(
      {term(1.0, "1 + 0.5*sin(x)", -1.0, 1.0), term(0.0, "0.5*cos(x)"), term(-1.0, "0.3")});
  const std::vector<double> orders{1.0, 0.0, -1.0};
  const auto plan = plan_orders(orders, 0.0);
  const std::vector<double> xs{-0.4, -0.2, 0.0, 0.2, 0.4};
  RecoveryOptions opt;
  opt.N = 48.0;
  const RecoveryEngine engine(m, plan, xs, 1.0, opt);
  const auto ok = run_trials<int>(100, 0, [&](std::size_t i) {
    const auto rep = engine.run(derive_seed(107, i, Purpose::NoisePath));
    if (rep.rows.size() != 10) return 0;
    for (const auto& r : rep.rows) {
      if (!(r.error <= 0.1)) return 0;
    }
    return 1;
  });
  int pass = 0;
  for (int v : ok) pass += v;
  return {pass >= 95, fmt("%.0f of 100 seeds with both terms within 0.1 at all five x0", pass)};
}

Outcome nonconvergence() {
  auto check = [](const DeviationCurve& c) {
    bool ok = c.increasing_trend() && c.points.back().interval.p_hat >= 0.9;
    for (const auto& p : c.points) {
      ok = ok && std::abs(p.interval.p_hat - p.closed_form) <= 3.0 * p.interval.half_width();
    }
    return ok;
  };
  NoiseSetting plain;
  plain.beta = 0.25;
  plain.m = 0.0;
  plain.lambda = 2.0;
  const std::vector<double> tp{2, 4, 8, 16, 32, 64};
  const auto a = nonconvergence_experiment(plain, 1.0, 4.0, tp, 1000, 108);

  NoiseSetting avg;
  avg.target = VarianceTarget::Averaged;
  avg.beta = 0.5;
  avg.m = 0.0;
  avg.lambda = 2.5;
  const double c = 0.25 * noise_sd(avg, 64.0);
  const auto b = nonconvergence_experiment(avg, 1.0, c, kT, 1000, 109);
  return {check(a) && check(b),
          fmt("plain p(64) = %.3f, averaged p(64) = %.3f", a.points.back().interval.p_hat,
              b.points.back().interval.p_hat) +
              fmt("; band ratios %.2f, %.2f", a.max_band_ratio(), b.max_band_ratio())};
}

Outcome rate_certificate() {
  RateSetting r;
  r.model.observable.symbol = SymbolExpansion(
      {term(1.0, "1 + 0.5*sin(x)", -1.0, 1.0), term(0.0, "0.5*cos(x)"), term(-1.0, "0.3")});
  r.model.family.x0 = 0.2;
  const std::vector<double> orders{1.0, 0.0, -1.0};
  r.plan = plan_orders(orders, 0.0);
  r.N_grid = {4, 6, 8, 12, 16, 24, 32, 48, 64};
  r.trials = 400;
  const auto cert = rate_certificate_experiment(r, 0.1, 0.1, 110);
  bool ok = !cert.verification.empty();
  double lowest = 1.0;
  for (const auto& v : cert.verification) {
    ok = ok && v.interval.p_hat >= 0.9;
    lowest = std::min(lowest, v.interval.p_hat);
  }
  const RateSampler sampler(r, 110);
  const double half = sampler.N0(0.05, 0.1);
  const double full = sampler.N0(0.1, 0.1);
  ok = ok && (half == 0.0 || half >= full);
  return {ok, fmt("N0 = %.0f, lowest verified success %.3f", cert.N0, lowest) +
                  fmt("; N0(eps/2) = %.0f vs N0(eps) = %.0f", half, full)};
}

Outcome reproducibility() {
  const auto c = parse_config(
      "term = 1 ; 1 + 0.5*sin(x) ; -1 ; 1\n"
      "term = 0 ; 0.5*cos(x) ; 1 ; 1\n"
      "term = -1 ; 0.3 ; 1 ; 1\n"
      "x0 = -0.4, -0.2, 0, 0.2, 0.4\n"
      "trials = 1000\n"
      "seed = 111\n"
      "noise.m = 0\n");
  bool ok = true;
  std::string detail;
  for (const char* cmd : {"recover", "variance-scaling", "nonconvergence", "rate", "noise-stats",
                          "asymptotics"}) {
    RunOptions one;
    one.workers = 1;
    RunOptions four;
    four.workers = 4;
    const auto a = to_csv(execute(cmd, c, one).rows);
    const auto b = to_csv(execute(cmd, c, one).rows);
    const auto d = to_csv(execute(cmd, c, four).rows);
    const bool same = a == b && a == d;
    ok = ok && same;
    detail += std::string(detail.empty() ? "" : ", ") + cmd + (same ? " identical" : " DIFFERS");
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"packet norms", packet_norms},
      {"noise isometry", noise_isometry},
      {"kernel-oracle equivalence", kernel_oracle},
      {"deterministic rates", deterministic_rates},
      {"plain-noise scaling", plain_scaling},
      {"ergodic-average scaling", averaged_scaling},
      {"end-to-end recovery", end_to_end},
      {"non-convergence", nonconvergence},
      {"rate certificate", rate_certificate},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
