#include "wprobe/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "wprobe/errors.hpp"

namespace wprobe {

double LowFrequencyCutoff::operator()(double r) const {
  if (r >= 0.5) return 1.0;
  if (r <= bridge_start) return 0.0;
  const double s = (r - bridge_start) / (0.5 - bridge_start);
  return s * s * s * (s * (6.0 * s - 15.0) + 10.0);
}

double HomogeneousTerm::radial(double xi) const {
  const double r = std::abs(xi);
  const double psi = cutoff(r);
  if (psi == 0.0) return 0.0;
  return psi * std::pow(r, order);
}

cplx HomogeneousTerm::operator()(double x, double xi) const {
  const double rad = radial(xi);
  if (rad == 0.0) return {0.0, 0.0};
  return rad * coefficient(x, xi < 0.0 ? -1 : 1);
}

double RemainderTerm::radial(double xi) const { return std::pow(1.0 + xi * xi, 0.5 * order); }

cplx RemainderTerm::operator()(double x, double xi) const { return {radial(xi) * c(x), 0.0}; }

SymbolExpansion::SymbolExpansion(std::vector<HomogeneousTerm> terms,
                                 std::optional<RemainderTerm> remainder)
    : terms_(std::move(terms)), remainder_(std::move(remainder)) {
  if (terms_.empty()) throw ConfigError("symbols: an expansion needs at least one term");
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const auto& t = terms_[j];
    if (!std::isfinite(t.order)) throw ConfigError("symbols: term orders must be finite");
    if (!(t.cutoff.bridge_start >= 0.0 && t.cutoff.bridge_start < 0.5)) {
      throw ConfigError("symbols: cutoff bridge must start in [0, 1/2)");
    }
    if (j > 0 && !(t.order < terms_[j - 1].order)) {
      throw ConfigError(
          "symbols: orders of a homogeneous expansion must strictly decrease (m_1 > m_2 > ...), "
          "got m_" + std::to_string(j) + " = " + std::to_string(terms_[j - 1].order) + " and m_" +
          std::to_string(j + 1) + " = " + std::to_string(t.order));
    }
  }
  if (remainder_ && !(remainder_->order < terms_.back().order)) {
    throw ConfigError("symbols: remainder order must lie below the last term order");
  }
}

bool SymbolExpansion::depends_on_x() const {
  for (const auto& t : terms_) {
    if (t.coefficient.depends_on_x()) return true;
  }
  return remainder_ && remainder_->c.depends_on_x();
}

cplx SymbolExpansion::operator()(double x, double xi) const {
  cplx acc{0.0, 0.0};
  for (const auto& t : terms_) acc += t(x, xi);
  if (remainder_) acc += (*remainder_)(x, xi);
  return acc;
}

cplx eval_symbol(const HomogeneousTerm& term, double x, double xi) { return term(x, xi); }
cplx eval_symbol(const SymbolExpansion& symbol, double x, double xi) { return symbol(x, xi); }

namespace {

// a(x, xi) = radial(xi) * coef(x, sgn xi).
struct Separable {
  std::function<double(double)> radial;
  std::function<cplx(double, int)> coef;
  bool x_dependent;
};

Separable separable(const HomogeneousTerm& t) {
  return {[&t](double xi) { return t.radial(xi); },
          [&t](double x, int s) { return t.coefficient(x, s); }, t.coefficient.depends_on_x()};
}

Separable separable(const RemainderTerm& t) {
  return {[&t](double xi) { return t.radial(xi); },
          [&t](double x, int) { return cplx{t.c(x), 0.0}; }, t.c.depends_on_x()};
}

cplx fast_form(const SpectralPatch& f, const Separable& a) {
  const auto& w = f.window();
  const auto v = f.values();
  const cplx g_minus = a.coef(0.0, -1);
  const cplx g_plus = a.coef(0.0, 1);
  double minus = 0.0;
  double plus = 0.0;
  for (std::size_t n = 0; n < v.size(); ++n) {
    const double p = std::norm(v[n]);
    if (p == 0.0) continue;
    const double xi = w.point(n);
    if (xi < 0.0) {
      minus += a.radial(xi) * p;
    } else {
      plus += a.radial(xi) * p;
    }
  }
  return (g_minus * minus + g_plus * plus) * w.spacing();
}

// Physical-space quadrature for the terms flagged in `full`.
void full_forms(const SpectralPatch& f, const std::vector<Separable>& terms,
                const std::vector<std::size_t>& full, const PhysicalGrid& grid,
                std::vector<cplx>& out) {
  const auto& w = f.window();
  const auto v = f.values();
  const std::size_t nx = grid.size();
  const double dx = grid.spacing;
  const double x_first = grid.point(0);
  const std::size_t nt = full.size();
  // Frequencies relative to the window centre: the common factor cancels in
  // conj(f) * S and keeps the phases small.
  const double xi_c = w.center;

  std::vector<double> f_re(nx, 0.0), f_im(nx, 0.0);
  // S[(term * 2 + side) * nx + k], side 0 for xi < 0.
  std::vector<double> s_re(nt * 2 * nx, 0.0), s_im(nt * 2 * nx, 0.0);
  std::vector<double> amp(nt);
  const double scale = w.spacing() / std::sqrt(2.0 * std::numbers::pi);

  for (std::size_t n = 0; n < v.size(); ++n) {
    if (v[n] == cplx{0.0, 0.0}) continue;
    const double xi = w.point(n);
    const double rho = xi - xi_c;
    const std::size_t side = xi < 0.0 ? 0 : 1;
    const double c_re = v[n].real() * scale;
    const double c_im = v[n].imag() * scale;
    for (std::size_t q = 0; q < nt; ++q) amp[q] = terms[full[q]].radial(xi);
    const double st_re = std::cos(dx * rho);
    const double st_im = std::sin(dx * rho);
    double p_re = 0.0;
    double p_im = 0.0;
    for (std::size_t k = 0; k < nx; ++k) {
      if (k % 64 == 0) {
        const double arg = (x_first + static_cast<double>(k) * dx) * rho;
        p_re = std::cos(arg);
        p_im = std::sin(arg);
      }
      const double e_re = p_re * c_re - p_im * c_im;
      const double e_im = p_re * c_im + p_im * c_re;
      f_re[k] += e_re;
      f_im[k] += e_im;
      for (std::size_t q = 0; q < nt; ++q) {
        const std::size_t idx = (q * 2 + side) * nx + k;
        s_re[idx] += amp[q] * e_re;
        s_im[idx] += amp[q] * e_im;
      }
      const double nr = p_re * st_re - p_im * st_im;
      p_im = p_re * st_im + p_im * st_re;
      p_re = nr;
    }
  }

  double peak = 0.0;
  for (std::size_t k = 0; k < nx; ++k) peak = std::max(peak, std::hypot(f_re[k], f_im[k]));
  const double edge = std::max(std::hypot(f_re[0], f_im[0]), std::hypot(f_re[nx - 1], f_im[nx - 1]));
  if (peak > 0.0 && edge > 1e-8 * peak) {
    throw NumericalError("symbols: physical grid truncation tail " + std::to_string(edge / peak) +
                         " exceeds 1e-8 of the peak; widen the x grid");
  }

  for (std::size_t q = 0; q < nt; ++q) {
    const auto& a = terms[full[q]];
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < nx; ++k) {
      const double x = x_first + static_cast<double>(k) * dx;
      for (std::size_t side = 0; side < 2; ++side) {
        const std::size_t idx = (q * 2 + side) * nx + k;
        if (s_re[idx] == 0.0 && s_im[idx] == 0.0) continue;
        const cplx g = a.coef(x, side == 0 ? -1 : 1);
        const double gs_re = g.real() * s_re[idx] - g.imag() * s_im[idx];
        const double gs_im = g.real() * s_im[idx] + g.imag() * s_re[idx];
        re += f_re[k] * gs_re + f_im[k] * gs_im;
        im += f_re[k] * gs_im - f_im[k] * gs_re;
      }
    }
    out[full[q]] = {re * dx, im * dx};
  }
}

std::vector<cplx> forms(const SpectralPatch& f, const std::vector<Separable>& terms,
                        const PhysicalGrid& grid, QuadraturePath path) {
  std::vector<cplx> out(terms.size(), cplx{0.0, 0.0});
  std::vector<std::size_t> full;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const bool xdep = terms[j].x_dependent;
    if (path == QuadraturePath::Fast && xdep) {
      throw ConfigError("symbols: the frequency-only quadrature needs an x-independent symbol");
    }
    if (path == QuadraturePath::Full || xdep) {
      full.push_back(j);
    } else {
      out[j] = fast_form(f, terms[j]);
    }
  }
  if (!full.empty()) full_forms(f, terms, full, grid, out);
  for (const auto& v : out) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericalError("symbols: quadratic form is not finite; is a coefficient singular near x0?");
    }
  }
  return out;
}

}  // namespace

std::vector<cplx> quadratic_form_terms(const SpectralPatch& f,
                                       std::span<const HomogeneousTerm> terms,
                                       const PhysicalGrid& grid, QuadraturePath path) {
  std::vector<Separable> sep;
  sep.reserve(terms.size());
  for (const auto& t : terms) sep.push_back(separable(t));
  return forms(f, sep, grid, path);
}

cplx quadratic_form(const SpectralPatch& f, const HomogeneousTerm& term, const PhysicalGrid& grid,
                    QuadraturePath path) {
  return forms(f, {separable(term)}, grid, path)[0];
}

cplx quadratic_form(const SpectralPatch& f, const RemainderTerm& term, const PhysicalGrid& grid,
                    QuadraturePath path) {
  return forms(f, {separable(term)}, grid, path)[0];
}

cplx quadratic_form(const SpectralPatch& f, const Observable& P, const PhysicalGrid& grid,
                    QuadraturePath path) {
  std::vector<Separable> sep;
  for (const auto& t : P.symbol.terms()) sep.push_back(separable(t));
  if (P.symbol.remainder()) sep.push_back(separable(*P.symbol.remainder()));
  cplx acc{0.0, 0.0};
  for (const auto& v : forms(f, sep, grid, path)) acc += v;
  return acc;
}

std::vector<double> asymptotic_error_probe(const Observable& P, const WavePacketFamily& family,
                                           std::span<const double> t_list) {
  family.validate();
  const auto& a1 = P.symbol.terms().front();
  const cplx truth = a1(family.x0, family.xi0);
  std::vector<double> out;
  out.reserve(t_list.size());
  for (double t : t_list) {
    const SpectralPatch f = make_packet(family, t);
    const cplx q = quadratic_form(f, P, packet_grid(family, t, f.window()));
    out.push_back(std::abs(std::pow(t, -family.lambda * a1.order) * q - truth));
  }
  return out;
}

}  // namespace wprobe
