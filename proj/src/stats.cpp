#include "wprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wprobe/errors.hpp"

namespace wprobe {

SlopeRegression fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("stats_harness: regression needs equal lengths");
  if (x.size() < 4) throw ConfigError("stats_harness: regression needs at least 4 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw ConfigError("stats_harness: regression input is not finite");
    }
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("stats_harness: regression abscissae are all equal");
  SlopeRegression r;
  r.x.assign(x.begin(), x.end());
  r.y.assign(y.begin(), y.end());
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - r.intercept - r.slope * x[i];
    sse += e * e;
  }
  r.stderr_slope = std::sqrt(sse / (n - 2.0) / sxx);
  return r;
}

SlopeRegression fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size());
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw ConfigError("stats_harness: log-log regression needs x > 0");
    lx[i] = std::log(x[i]);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw ConfigError("stats_harness: log-log regression needs y > 0");
    ly[i] = std::log(y[i]);
  }
  return fit_slope(lx, ly);
}

WilsonInterval wilson(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw ConfigError("stats_harness: Wilson interval needs trials > 0");
  if (successes > trials) throw ConfigError("stats_harness: successes exceed trials");
  const auto n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {p, std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

MeanEstimate mean_estimate(std::span<const double> v) {
  if (v.size() < 2) throw ConfigError("stats_harness: mean estimate needs at least 2 samples");
  const auto n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

MeanEstimate complex_variance(std::span<const cplx> v) {
  if (v.size() < 2) throw ConfigError("stats_harness: variance needs at least 2 samples");
  const auto n = static_cast<double>(v.size());
  cplx m{0.0, 0.0};
  for (const auto& x : v) m += x;
  m /= n;
  std::vector<double> d(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = std::norm(v[i] - m) * n / (n - 1.0);
  return mean_estimate(d);
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("stats_harness: KS test needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  // Stephens' small-sample correction of the asymptotic distribution.
  return {d, kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)};
}

bool DeviationCurve::increasing_trend() const {
  if (points.size() < 2) return false;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : points) {
    x.push_back(std::log(p.parameter));
    y.push_back(p.interval.p_hat);
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my);
  return sxy > 0.0 && points.back().interval.p_hat >= points.front().interval.p_hat;
}

double DeviationCurve::max_band_ratio() const {
  double worst = 0.0;
  for (const auto& p : points) {
    const double hw = std::max(p.interval.half_width(), 1.0 / static_cast<double>(p.trials));
    worst = std::max(worst, std::abs(p.interval.p_hat - p.closed_form) / hw);
  }
  return worst;
}

std::pair<double, double> fit_rate_surface(std::span<const SurfacePoint> points) {
  if (points.size() < 2) throw ConfigError("stats_harness: rate surface needs at least 2 points");
  double best_sse = std::numeric_limits<double>::infinity();
  double best_c = 1.0;
  double best_theta = 1.0;
  for (int k = 0; k <= 2000; ++k) {
    const double theta = 0.01 * std::pow(1000.0, k / 2000.0);  // 0.01 .. 10, geometric
    double mean = 0.0;
    std::vector<double> lg(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      const double g = std::max(1.0 / p.epsilon, std::pow(std::log(1.0 / p.delta), 1.0 / theta));
      lg[i] = std::log(g);
      mean += std::log(p.N0) - lg[i];
    }
    mean /= static_cast<double>(points.size());
    double sse = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double e = std::log(points[i].N0) - mean - lg[i];
      sse += e * e;
    }
    if (sse < best_sse - 1e-15) {
      best_sse = sse;
      best_c = std::exp(mean);
      best_theta = theta;
    }
  }
  return {best_c, best_theta};
}

}  // namespace wprobe
