#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace wprobe {

using cplx = std::complex<double>;

/// Uniform midpoint grid on [center - half_width, center + half_width].
///
/// Grid points are xi_n = center - half_width + (n + 1/2) * spacing() for
/// n = 0 .. num_points - 1.
struct FrequencyWindow {
  double center = 0.0;
  double half_width = 1.0;
  std::size_t num_points = 2;

  double spacing() const { return 2.0 * half_width / static_cast<double>(num_points); }
  double lower() const { return center - half_width; }
  double upper() const { return center + half_width; }
  double point(std::size_t n) const {
    return lower() + (static_cast<double>(n) + 0.5) * spacing();
  }

  /// Throws ConfigError unless num_points >= 2 and half_width > 0 (finite).
  void validate() const;

  /// Smallest window whose cells are cells of the lattice {(k + 1/2) * spacing}
  /// and which covers [lo, hi].
  static FrequencyWindow on_lattice(double lo, double hi, double spacing);
};

/// Sobolev weight (1 + |xi|^2)^beta.
struct JapaneseBracketWeight {
  double beta = 0.0;
  double operator()(double xi) const;
};

/// A function stored through samples of its Fourier transform on a bounded
/// window; treated as zero outside the window.
class SpectralPatch {
 public:
  SpectralPatch() = default;
  /// Throws ConfigError on a size mismatch, non-finite samples or dim != 1.
  SpectralPatch(FrequencyWindow window, std::vector<cplx> values, int dim = 1);

  const FrequencyWindow& window() const { return window_; }
  std::span<const cplx> values() const { return values_; }
  int dim() const { return dim_; }
  std::size_t size() const { return values_.size(); }

  double l2_norm() const;

 private:
  FrequencyWindow window_{};
  std::vector<cplx> values_;
  int dim_ = 1;
};

/// True when both windows are made of cells of one common lattice.
bool share_lattice(const FrequencyWindow& a, const FrequencyWindow& b);

/// (f|g) = sum conj(f(xi_n)) g(xi_n) dxi over the overlap of the windows.
/// Patches on different lattices are brought onto a common grid with
/// windowed-sinc interpolation; the coarser patch is always the one resampled,
/// so (f|g) == conj((g|f)) holds up to roundoff in every case.
cplx inner_product_l2(const SpectralPatch& f, const SpectralPatch& g);

/// (f|g)_beta = sum (1 + xi_n^2)^beta conj(f(xi_n)) g(xi_n) dxi.
/// Identical to inner_product_l2 bit for bit when beta == 0.
cplx inner_product_sobolev(const SpectralPatch& f, const SpectralPatch& g,
                           JapaneseBracketWeight weight);

/// f(x_k) = (2 pi)^{-1/2} sum_n exp(i x_k xi_n) f(xi_n) dxi.
std::vector<cplx> evaluate_physical(const SpectralPatch& f, std::span<const double> x);

/// Samples of g on `target` by truncated windowed-sinc interpolation
/// (half-width 8 samples); zero where the target lies outside g's window.
SpectralPatch resample(const SpectralPatch& g, const FrequencyWindow& target);

/// Uniform midpoint grid on [center - radius, center + radius] in physical space.
struct PhysicalGrid {
  double center = 0.0;
  double radius = 1.0;
  double spacing = 0.1;

  std::size_t size() const;
  double point(std::size_t k) const;
  std::vector<double> points() const;
};

/// Number of sinc taps on each side used by resample().
inline constexpr int kSincHalfWidth = 8;

}  // namespace wprobe
