#pragma once

#include <variant>
#include <vector>

#include "wprobe/expression.hpp"
#include "wprobe/spectral.hpp"

namespace wprobe {

/// g(x, w) = c(x) * h(w) for w in {-1, +1}.
struct ProductCoefficient {
  Expression c;
  double h_minus = 1.0;
  double h_plus = 1.0;
};

/// Complex samples of g(., -1) and g(., +1) on an increasing x grid, joined by
/// natural cubic splines and continued linearly beyond the end points.
class TabulatedCoefficient {
 public:
  TabulatedCoefficient() = default;
  TabulatedCoefficient(std::vector<double> x, std::vector<cplx> minus, std::vector<cplx> plus);

  cplx operator()(double x, int sign) const;
  const std::vector<double>& x() const { return x_; }

 private:
  struct Spline {
    std::vector<cplx> y;
    std::vector<cplx> m;  // second derivatives at the knots
    cplx eval(const std::vector<double>& xs, double x) const;
  };
  static Spline natural(const std::vector<double>& xs, std::vector<cplx> y);

  std::vector<double> x_;
  Spline minus_;
  Spline plus_;
};

/// The x- and direction-dependent factor of a homogeneous term.
class Coefficient {
 public:
  Coefficient() : impl_(ProductCoefficient{Expression::constant(1.0), 1.0, 1.0}) {}
  Coefficient(ProductCoefficient p) : impl_(std::move(p)) {}
  Coefficient(TabulatedCoefficient t) : impl_(std::move(t)) {}

  /// sign < 0 selects h(-1), otherwise h(+1).
  cplx operator()(double x, int sign) const;
  bool depends_on_x() const;

  const ProductCoefficient* product() const { return std::get_if<ProductCoefficient>(&impl_); }
  const TabulatedCoefficient* tabulated() const {
    return std::get_if<TabulatedCoefficient>(&impl_);
  }

 private:
  std::variant<ProductCoefficient, TabulatedCoefficient> impl_;
};

}  // namespace wprobe
