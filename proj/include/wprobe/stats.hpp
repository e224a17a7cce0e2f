#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wprobe/spectral.hpp"

namespace wprobe {

/// Ordinary least squares y = intercept + slope * x.
struct SlopeRegression {
  std::vector<double> x;
  std::vector<double> y;
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

/// Throws ConfigError with fewer than 4 points, non-finite input or constant x.
SlopeRegression fit_slope(std::span<const double> x, std::span<const double> y);
/// fit_slope on (log x, log y); all inputs must be > 0.
SlopeRegression fit_loglog(std::span<const double> x, std::span<const double> y);

struct WilsonInterval {
  double p_hat = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  double half_width() const { return 0.5 * (upper - lower); }
};

WilsonInterval wilson(std::size_t successes, std::size_t trials, double z = 1.96);

/// Sample mean of |x|^2 style quantities with its standard error.
struct MeanEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

MeanEstimate mean_estimate(std::span<const double> v);
/// Sample variance (n - 1 normalization) of complex values around their mean,
/// with the standard error of that estimate.
MeanEstimate complex_variance(std::span<const cplx> v);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_survival(double x);

struct DeviationPoint {
  double parameter = 0.0;  // t or T
  std::size_t exceed = 0;
  std::size_t trials = 0;
  WilsonInterval interval;
  double sigma2 = 0.0;       // variance of the noise from the kernel
  double closed_form = 0.0;  // exp(-c^2 / sigma2)
};

/// Estimated P{|estimate - a_j| > c} along a parameter grid.
struct DeviationCurve {
  double c = 0.0;
  std::vector<DeviationPoint> points;

  /// Slope of p_hat against log parameter is positive and the last point is
  /// at least the first.
  bool increasing_trend() const;
  /// max |p_hat - closed_form| / half_width (half widths floored at 1/trials).
  double max_band_ratio() const;
};

struct RatePoint {
  double N = 0.0;
  std::size_t successes = 0;
  std::size_t trials = 0;
  WilsonInterval interval;
};

struct SurfacePoint {
  double epsilon;
  double delta;
  double N0;
};

struct RateCertificate {
  double epsilon = 0.0;
  double delta = 0.0;
  double N0 = 0.0;
  std::vector<RatePoint> search;
  /// Success rates on fresh seeds at every grid N >= N0.
  std::vector<RatePoint> verification;
  /// Fitted N0 = C max(1/eps, log(1/delta)^{1/theta}) over a surface of (eps, delta).
  double C_emp = 0.0;
  double theta_emp = 0.0;
  /// (eps, delta, N0) points used by the fit.
  std::vector<SurfacePoint> surface;
};

/// Least squares fit of log N0 over a theta grid with C in closed form.
/// Returns {C, theta}. Throws ConfigError with fewer than 2 points.
std::pair<double, double> fit_rate_surface(std::span<const SurfacePoint> points);

}  // namespace wprobe
