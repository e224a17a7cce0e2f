#include "wprobe/coefficient.hpp"

#include <algorithm>
#include <cmath>

#include "wprobe/errors.hpp"

namespace wprobe {

TabulatedCoefficient::Spline TabulatedCoefficient::natural(const std::vector<double>& xs,
                                                           std::vector<cplx> y) {
  const std::size_t n = xs.size();
  Spline s{std::move(y), std::vector<cplx>(n, cplx{0.0, 0.0})};
  if (n < 3) return s;
  // Tridiagonal solve for the interior second derivatives (Thomas algorithm).
  std::vector<double> diag(n, 0.0);
  std::vector<cplx> rhs(n, cplx{0.0, 0.0});
  std::vector<double> upper(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = xs[i] - xs[i - 1];
    const double h1 = xs[i + 1] - xs[i];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((s.y[i + 1] - s.y[i]) / h1 - (s.y[i] - s.y[i - 1]) / h0);
  }
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double lower = xs[i] - xs[i - 1];
    const double f = lower / diag[i - 1];
    diag[i] -= f * upper[i - 1];
    rhs[i] -= f * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    s.m[i] = (rhs[i] - upper[i] * s.m[i + 1]) / diag[i];
    if (i == 1) break;
  }
  return s;
}

cplx TabulatedCoefficient::Spline::eval(const std::vector<double>& xs, double x) const {
  const std::size_t n = xs.size();
  if (n == 1) return y[0];
  // Beyond the grid the natural spline continues as a straight line.
  if (x <= xs.front()) {
    const double h = xs[1] - xs[0];
    const cplx slope = (y[1] - y[0]) / h - m[1] * (h / 6.0);
    return y[0] + slope * (x - xs[0]);
  }
  if (x >= xs.back()) {
    const double h = xs[n - 1] - xs[n - 2];
    const cplx slope = (y[n - 1] - y[n - 2]) / h + m[n - 2] * (h / 6.0);
    return y[n - 1] + slope * (x - xs[n - 1]);
  }
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  const double h = xs[i + 1] - xs[i];
  const double a = (xs[i + 1] - x) / h;
  const double b = (x - xs[i]) / h;
  return a * y[i] + b * y[i + 1] +
         ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * (h * h / 6.0);
}

TabulatedCoefficient::TabulatedCoefficient(std::vector<double> x, std::vector<cplx> minus,
                                           std::vector<cplx> plus)
    : x_(std::move(x)) {
  if (x_.empty() || minus.size() != x_.size() || plus.size() != x_.size()) {
    throw ConfigError("symbols: tabulated coefficient needs matching non-empty tables");
  }
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw ConfigError("symbols: tabulated coefficient grid must be strictly increasing");
    }
  }
  minus_ = natural(x_, std::move(minus));
  plus_ = natural(x_, std::move(plus));
}

cplx TabulatedCoefficient::operator()(double x, int sign) const {
  return sign < 0 ? minus_.eval(x_, x) : plus_.eval(x_, x);
}

cplx Coefficient::operator()(double x, int sign) const {
  if (const auto* p = product()) {
    return {p->c(x) * (sign < 0 ? p->h_minus : p->h_plus), 0.0};
  }
  return std::get<TabulatedCoefficient>(impl_)(x, sign);
}

bool Coefficient::depends_on_x() const {
  if (const auto* p = product()) return p->c.depends_on_x();
  return std::get<TabulatedCoefficient>(impl_).x().size() > 1;
}

}  // namespace wprobe
