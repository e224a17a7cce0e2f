#include "wprobe/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wprobe/errors.hpp"

namespace wprobe {

void FrequencyWindow::validate() const {
  if (!std::isfinite(center) || !std::isfinite(half_width) || !(half_width > 0.0)) {
    throw ConfigError("spectral_core: FrequencyWindow needs finite center and half_width > 0");
  }
  if (num_points < 2) {
    throw ConfigError("spectral_core: FrequencyWindow needs num_points >= 2");
  }
}

FrequencyWindow FrequencyWindow::on_lattice(double lo, double hi, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw ConfigError("spectral_core: lattice window needs spacing > 0 and lo <= hi");
  }
  auto k_lo = static_cast<long long>(std::floor(lo / spacing));
  auto k_hi = static_cast<long long>(std::ceil(hi / spacing));
  if (k_hi - k_lo < 2) k_hi = k_lo + 2;
  const double lower = static_cast<double>(k_lo) * spacing;
  const double upper = static_cast<double>(k_hi) * spacing;
  return FrequencyWindow{0.5 * (lower + upper), 0.5 * (upper - lower),
                         static_cast<std::size_t>(k_hi - k_lo)};
}

double JapaneseBracketWeight::operator()(double xi) const {
  if (beta == 0.0) return 1.0;
  return std::pow(1.0 + xi * xi, beta);
}

SpectralPatch::SpectralPatch(FrequencyWindow window, std::vector<cplx> values, int dim)
    : window_(window), values_(std::move(values)), dim_(dim) {
  window_.validate();
  if (dim_ != 1) {
    throw ConfigError("spectral_core: only dim = 1 is supported, got " + std::to_string(dim_));
  }
  if (values_.size() != window_.num_points) {
    throw ConfigError("spectral_core: patch has " + std::to_string(values_.size()) +
                      " samples for a window of " + std::to_string(window_.num_points));
  }
  for (const auto& v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw ConfigError("spectral_core: patch values must be finite");
    }
  }
}

double SpectralPatch::l2_norm() const {
  double acc = 0.0;
  for (const auto& v : values_) acc += std::norm(v);
  return std::sqrt(acc * window_.spacing());
}

namespace {

constexpr double kSpacingRelTol = 1e-10;
constexpr double kOffsetTol = 1e-6;

long long lattice_shift(const FrequencyWindow& a, const FrequencyWindow& b) {
  return std::llround((b.lower() - a.lower()) / a.spacing());
}

bool same_spacing(const FrequencyWindow& a, const FrequencyWindow& b) {
  return std::abs(a.spacing() - b.spacing()) <= kSpacingRelTol * a.spacing();
}

// Canonical ordering used to make both argument orders run identical arithmetic.
bool precedes(const FrequencyWindow& a, const FrequencyWindow& b) {
  if (!same_spacing(a, b)) return a.spacing() < b.spacing();
  return a.lower() <= b.lower();
}

// Sum over the common cells of two windows on one lattice. `first` is the
// canonical reference; the conjugated factor is `f`.
cplx lattice_sum(const SpectralPatch& f, const SpectralPatch& g, bool f_is_reference,
                 const JapaneseBracketWeight& weight) {
  const SpectralPatch& ref = f_is_reference ? f : g;
  const SpectralPatch& other = f_is_reference ? g : f;
  const long long shift = lattice_shift(ref.window(), other.window());
  const long long n_ref = static_cast<long long>(ref.size());
  const long long n_other = static_cast<long long>(other.size());
  const long long begin = std::max<long long>(0, shift);
  const long long end = std::min<long long>(n_ref, n_other + shift);
  if (begin >= end) return {0.0, 0.0};

  const auto fv = f.values();
  const auto gv = g.values();
  const long long f_off = f_is_reference ? 0 : shift;
  const long long g_off = f_is_reference ? shift : 0;
  const bool weighted = weight.beta != 0.0;

  double re = 0.0;
  double im = 0.0;
  for (long long n = begin; n < end; ++n) {
    const cplx a = fv[static_cast<std::size_t>(n - f_off)];
    const cplx b = gv[static_cast<std::size_t>(n - g_off)];
    double pr = a.real() * b.real() + a.imag() * b.imag();
    double pi = a.real() * b.imag() - a.imag() * b.real();
    if (weighted) {
      const double w = weight(ref.window().point(static_cast<std::size_t>(n)));
      pr *= w;
      pi *= w;
    }
    re += pr;
    im += pi;
  }
  const double d = ref.window().spacing();
  return {re * d, im * d};
}

cplx inner_impl(const SpectralPatch& f, const SpectralPatch& g, const JapaneseBracketWeight& w) {
  if (f.dim() != g.dim()) {
    throw ConfigError("spectral_core: inner product of patches with different dim");
  }
  const auto& wf = f.window();
  const auto& wg = g.window();
  if (wf.upper() <= wg.lower() || wg.upper() <= wf.lower()) return {0.0, 0.0};

  const bool f_first = precedes(wf, wg);
  if (share_lattice(wf, wg)) return lattice_sum(f, g, f_first, w);

  // Resample the non-reference patch onto reference cells over its span.
  const auto& ref = f_first ? wf : wg;
  const auto& other = f_first ? wg : wf;
  const double lo = std::max(ref.lower(), other.lower());
  const double hi = std::min(ref.upper(), other.upper());
  const double d = ref.spacing();
  // Cells of the reference lattice covering [lo, hi].
  const double base = ref.lower();
  const auto first = static_cast<long long>(std::floor((lo - base) / d + 1e-9));
  const auto last = static_cast<long long>(std::ceil((hi - base) / d - 1e-9));
  const auto n = static_cast<std::size_t>(std::max<long long>(2, last - first));
  const double sub_lo = base + static_cast<double>(first) * d;
  FrequencyWindow target{sub_lo + 0.5 * static_cast<double>(n) * d,
                         0.5 * static_cast<double>(n) * d, n};
  if (f_first) {
    const SpectralPatch gr = resample(g, target);
    return lattice_sum(f, gr, true, w);
  }
  const SpectralPatch fr = resample(f, target);
  return lattice_sum(fr, g, false, w);
}

double sinc(double u) {
  if (std::abs(u) < 1e-12) return 1.0;
  const double pu = std::numbers::pi * u;
  return std::sin(pu) / pu;
}

// Kaiser window on [-1, 1].
double kaiser(double u) {
  constexpr double kBeta = 16.0;
  if (std::abs(u) >= 1.0) return 0.0;
  static const double norm = std::cyl_bessel_i(0.0, kBeta);
  return std::cyl_bessel_i(0.0, kBeta * std::sqrt(1.0 - u * u)) / norm;
}

}  // namespace

bool share_lattice(const FrequencyWindow& a, const FrequencyWindow& b) {
  if (!same_spacing(a, b)) return false;
  const double offset = (b.lower() - a.lower()) / a.spacing();
  return std::abs(offset - std::round(offset)) <= kOffsetTol;
}

cplx inner_product_l2(const SpectralPatch& f, const SpectralPatch& g) {
  return inner_impl(f, g, JapaneseBracketWeight{0.0});
}

cplx inner_product_sobolev(const SpectralPatch& f, const SpectralPatch& g,
                           JapaneseBracketWeight weight) {
  return inner_impl(f, g, weight);
}

std::vector<cplx> evaluate_physical(const SpectralPatch& f, std::span<const double> x) {
  const auto& w = f.window();
  const double d = w.spacing();
  const double scale = d / std::sqrt(2.0 * std::numbers::pi);
  const auto v = f.values();
  std::vector<cplx> out(x.size());
  constexpr std::size_t kRefresh = 64;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k])) throw ConfigError("spectral_core: evaluation point is not finite");
    const cplx step = std::polar(1.0, x[k] * d);
    cplx phase;
    cplx acc{0.0, 0.0};
    for (std::size_t n = 0; n < v.size(); ++n) {
      if (n % kRefresh == 0) {
        phase = std::polar(1.0, x[k] * w.point(n));
      } else {
        phase *= step;
      }
      acc += phase * v[n];
    }
    out[k] = acc * scale;
  }
  return out;
}

std::size_t PhysicalGrid::size() const {
  if (!(radius > 0.0) || !(spacing > 0.0) || !std::isfinite(center)) {
    throw ConfigError("spectral_core: PhysicalGrid needs finite center, radius > 0, spacing > 0");
  }
  return static_cast<std::size_t>(std::ceil(2.0 * radius / spacing));
}

double PhysicalGrid::point(std::size_t k) const {
  const double n = static_cast<double>(size());
  return center - 0.5 * n * spacing + (static_cast<double>(k) + 0.5) * spacing;
}

std::vector<double> PhysicalGrid::points() const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = point(k);
  return out;
}

SpectralPatch resample(const SpectralPatch& g, const FrequencyWindow& target) {
  target.validate();
  const auto& src = g.window();
  const double d = src.spacing();
  const auto v = g.values();
  const long long n_src = static_cast<long long>(v.size());
  std::vector<cplx> out(target.num_points, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < target.num_points; ++i) {
    const double xi = target.point(i);
    if (xi <= src.lower() || xi >= src.upper()) continue;
    // Fractional source index of xi.
    const double pos = (xi - src.lower()) / d - 0.5;
    const auto centre = static_cast<long long>(std::floor(pos));
    // Taps are normalized to sum to one (taken over the full stencil, including
    // cells outside the source window, where g vanishes).
    cplx acc{0.0, 0.0};
    double wsum = 0.0;
    for (long long k = centre - kSincHalfWidth + 1; k <= centre + kSincHalfWidth; ++k) {
      const double u = pos - static_cast<double>(k);
      const double wk = sinc(u) * kaiser(u / static_cast<double>(kSincHalfWidth));
      wsum += wk;
      if (k < 0 || k >= n_src) continue;
      acc += v[static_cast<std::size_t>(k)] * wk;
    }
    out[i] = acc / wsum;
  }
  return SpectralPatch(target, std::move(out), g.dim());
}

}  // namespace wprobe
