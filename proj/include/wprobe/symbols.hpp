#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wprobe/coefficient.hpp"
#include "wprobe/spectral.hpp"
#include "wprobe/wave_packets.hpp"

namespace wprobe {

/// psi(r): 0 for r <= bridge_start, 1 for r >= 1/2, quintic smoothstep between.
struct LowFrequencyCutoff {
  double bridge_start = 0.25;
  double operator()(double r) const;
};

/// a(x, xi) = psi(|xi|) |xi|^order g(x, sgn xi).
struct HomogeneousTerm {
  double order = 0.0;
  Coefficient coefficient;
  LowFrequencyCutoff cutoff;

  cplx operator()(double x, double xi) const;
  /// psi(|xi|) |xi|^order, the frequency factor.
  double radial(double xi) const;
};

/// Optional non-homogeneous tail r(x, xi) = <xi>^order c(x).
struct RemainderTerm {
  double order = -1.0;
  Expression c;

  cplx operator()(double x, double xi) const;
  double radial(double xi) const;
};

/// Finite sum of homogeneous terms with strictly decreasing orders, plus an
/// optional remainder whose order lies below the last term.
class SymbolExpansion {
 public:
  SymbolExpansion() = default;
  /// Throws ConfigError when terms is empty or orders do not strictly decrease.
  explicit SymbolExpansion(std::vector<HomogeneousTerm> terms,
                           std::optional<RemainderTerm> remainder = std::nullopt);

  const std::vector<HomogeneousTerm>& terms() const { return terms_; }
  const std::optional<RemainderTerm>& remainder() const { return remainder_; }
  std::size_t size() const { return terms_.size(); }
  double order(std::size_t j) const { return terms_.at(j).order; }
  bool depends_on_x() const;

  cplx operator()(double x, double xi) const;

 private:
  std::vector<HomogeneousTerm> terms_;
  std::optional<RemainderTerm> remainder_;
};

/// The operator P whose symbol is exactly the finite sum of its terms.
struct Observable {
  SymbolExpansion symbol;
};

cplx eval_symbol(const HomogeneousTerm& term, double x, double xi);
cplx eval_symbol(const SymbolExpansion& symbol, double x, double xi);

enum class QuadraturePath {
  Auto,  // fast path whenever the symbol does not depend on x
  Fast,  // sum a(xi) |f(xi)|^2 dxi; ConfigError for x-dependent symbols
  Full,  // physical-space double sum
};

/// (f | a(x, D) f) for each term, sharing one evaluation of f on the grid.
/// The full path throws NumericalError when |f| at the grid edges exceeds
/// 1e-8 of its maximum.
std::vector<cplx> quadratic_form_terms(const SpectralPatch& f,
                                       std::span<const HomogeneousTerm> terms,
                                       const PhysicalGrid& grid,
                                       QuadraturePath path = QuadraturePath::Auto);

cplx quadratic_form(const SpectralPatch& f, const HomogeneousTerm& term, const PhysicalGrid& grid,
                    QuadraturePath path = QuadraturePath::Auto);
cplx quadratic_form(const SpectralPatch& f, const RemainderTerm& term, const PhysicalGrid& grid,
                    QuadraturePath path = QuadraturePath::Auto);
cplx quadratic_form(const SpectralPatch& f, const Observable& P, const PhysicalGrid& grid,
                    QuadraturePath path = QuadraturePath::Auto);

/// |t^{-lambda m_1} (f_t | P f_t) - a_1(x0, xi0)| for each t.
std::vector<double> asymptotic_error_probe(const Observable& P, const WavePacketFamily& family,
                                           std::span<const double> t_list);

}  // namespace wprobe
