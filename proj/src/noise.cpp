#include "wprobe/noise.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "wprobe/errors.hpp"
#include "wprobe/rng.hpp"

namespace wprobe {

namespace {

constexpr double kPsdTol = 1e-10;
constexpr std::size_t kDenseLimit = 256;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

NoiseKernel::NoiseKernel(std::vector<double> nodes, double beta, double spacing,
                         std::size_t bandwidth, std::vector<std::vector<double>> band)
    : nodes_(std::move(nodes)),
      beta_(beta),
      spacing_(spacing),
      bandwidth_(bandwidth),
      band_(std::move(band)) {
  if (nodes_.empty()) throw ConfigError("noise_engine: kernel needs at least one node");
  if (band_.size() != nodes_.size()) throw ConfigError("noise_engine: band rows != node count");
  for (auto& row : band_) row.resize(bandwidth_ + 1, 0.0);
  const std::size_t k = nodes_.size();
  if (k <= kDenseLimit || 4 * bandwidth_ >= k) {
    factor_eigen();
  } else {
    factor_banded();
  }
}

double NoiseKernel::operator()(std::size_t i, std::size_t j) const {
  if (i < j) std::swap(i, j);
  const std::size_t d = i - j;
  return d > bandwidth_ ? 0.0 : band_[i][d];
}

double NoiseKernel::trace() const {
  double acc = 0.0;
  for (const auto& row : band_) acc += row[0];
  return acc;
}

Eigen::MatrixXd NoiseKernel::dense() const {
  const auto k = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      c(i, j) = c(j, i) = (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  return c;
}

double NoiseKernel::quadratic(std::span<const double> w) const {
  if (w.size() != size()) throw ConfigError("noise_engine: weight vector length != node count");
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    acc += w[i] * w[i] * band_[i][0];
    const std::size_t dmax = std::min(bandwidth_, i);
    for (std::size_t d = 1; d <= dmax; ++d) acc += 2.0 * w[i] * w[i - d] * band_[i][d];
  }
  return acc;
}

void NoiseKernel::factor_eigen() {
  route_ = Route::Eigen;
  const Eigen::MatrixXd c = dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success) {
    throw NumericalError("noise_engine: eigendecomposition of the kernel failed");
  }
  const double tol = kPsdTol * std::max(trace(), 0.0);
  Eigen::VectorXd ev = es.eigenvalues();
  const double min_ev = ev.minCoeff();
  if (min_ev < -tol) {
    throw NumericalError("noise_engine: kernel is not positive semidefinite (eigenvalue " +
                         fmt(min_ev) + " below -1e-10 * trace = " + fmt(-tol) + ")");
  }
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 0.0));
  sym_factor_ = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

void NoiseKernel::factor_banded() {
  route_ = Route::BandedLDLT;
  const std::size_t k = size();
  const std::size_t bw = bandwidth_;
  const double tr = trace();
  const double tol = kPsdTol * tr;
  // A pivot this small relative to the diagonal carries only roundoff.
  const double tiny = 1e-13;
  l_band_.assign(k, std::vector<double>(bw + 1, 0.0));
  std::vector<double> d(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t lo = i > bw ? i - bw : 0;
    // Row i of L: L(i, j) for lo <= j < i.
    for (std::size_t j = lo; j < i; ++j) {
      if (d[j] == 0.0) continue;
      double s = band_[i][i - j];
      const std::size_t lo_j = j > bw ? j - bw : 0;
      for (std::size_t q = std::max(lo, lo_j); q < j; ++q) {
        s -= l_band_[i][i - q] * l_band_[j][j - q] * d[q];
      }
      l_band_[i][i - j] = s / d[j];
    }
    double piv = band_[i][0];
    for (std::size_t q = lo; q < i; ++q) piv -= l_band_[i][i - q] * l_band_[i][i - q] * d[q];
    if (piv < -tol) {
      throw NumericalError("noise_engine: kernel is not positive semidefinite (LDL^T pivot " +
                           fmt(piv) + " below -1e-10 * trace = " + fmt(-tol) + ")");
    }
    d[i] = piv > tiny * band_[i][0] ? piv : 0.0;
    l_band_[i][0] = 1.0;
  }
  root_d_.resize(k);
  for (std::size_t i = 0; i < k; ++i) root_d_[i] = std::sqrt(d[i]);
}

std::vector<cplx> NoiseKernel::apply_factor(std::span<const cplx> z) const {
  const std::size_t k = size();
  if (z.size() != k) throw ConfigError("noise_engine: factor input length != node count");
  std::vector<cplx> out(k, cplx{0.0, 0.0});
  if (route_ == Route::Eigen) {
    for (std::size_t i = 0; i < k; ++i) {
      double re = 0.0;
      double im = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double l = sym_factor_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        re += l * z[j].real();
        im += l * z[j].imag();
      }
      out[i] = {re, im};
    }
    return out;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t lo = i > bandwidth_ ? i - bandwidth_ : 0;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = lo; j <= i; ++j) {
      const double l = l_band_[i][i - j] * root_d_[j];
      re += l * z[j].real();
      im += l * z[j].imag();
    }
    out[i] = {re, im};
  }
  return out;
}

Eigen::MatrixXd NoiseKernel::factor_dense() const {
  if (route_ == Route::Eigen) return sym_factor_;
  const auto k = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < size(); ++i) {
    const std::size_t lo = i > bandwidth_ ? i - bandwidth_ : 0;
    for (std::size_t j = lo; j <= i; ++j) {
      l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = l_band_[i][i - j] * root_d_[j];
    }
  }
  return l;
}

double kernel_spacing(std::span<const double> nodes) {
  if (nodes.empty()) throw ConfigError("noise_engine: kernel needs at least one node");
  return default_spacing(*std::min_element(nodes.begin(), nodes.end()));
}

NoiseKernel build_kernel(const WavePacketFamily& family, std::span<const double> nodes,
                         double beta, double spacing) {
  family.validate();
  if (nodes.empty()) throw ConfigError("noise_engine: kernel needs at least one node");
  for (double t : nodes) {
    if (!(t >= 1.0) || !std::isfinite(t)) throw ConfigError("noise_engine: nodes must be >= 1");
  }
  if (!std::isfinite(beta)) throw ConfigError("noise_engine: beta must be finite");
  if (spacing <= 0.0) spacing = kernel_spacing(nodes);
  const std::size_t k = nodes.size();
  bool monotone = true;
  for (std::size_t i = 1; i < k; ++i) {
    if (!(nodes[i] > nodes[i - 1])) monotone = false;
  }
  const JapaneseBracketWeight w{beta};
  auto disjoint = [](const SpectralPatch& a, const SpectralPatch& b) {
    return a.window().upper() <= b.window().lower() || b.window().upper() <= a.window().lower();
  };
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(k);
  std::size_t bw = 0;
  if (monotone) {
    // Windows move monotonically with t, so a patch disjoint from node i is
    // disjoint from every later node; only a sliding band of patches is kept.
    std::deque<std::pair<std::size_t, SpectralPatch>> live;
    for (std::size_t i = 0; i < k; ++i) {
      SpectralPatch fi = make_packet(family, nodes[i], spacing);
      while (!live.empty() && disjoint(live.front().second, fi)) live.pop_front();
      live.emplace_back(i, std::move(fi));
      const SpectralPatch& cur = live.back().second;
      for (const auto& [j, fj] : live) {
        const double v = std::norm(inner_product_sobolev(fj, cur, w));
        rows[i].emplace_back(i - j, v);
        bw = std::max(bw, i - j);
      }
    }
  } else {
    std::vector<SpectralPatch> patches;
    patches.reserve(k);
    for (double t : nodes) patches.push_back(make_packet(family, t, spacing));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        if (j < i && disjoint(patches[i], patches[j])) continue;
        const double v = std::norm(inner_product_sobolev(patches[j], patches[i], w));
        rows[i].emplace_back(i - j, v);
        bw = std::max(bw, i - j);
      }
    }
  }
  std::vector<std::vector<double>> band(k, std::vector<double>(bw + 1, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (const auto& [d, v] : rows[i]) band[i][d] = v;
  }
  return NoiseKernel(std::vector<double>(nodes.begin(), nodes.end()), beta, spacing, bw,
                     std::move(band));
}

NoisePath sample_path(const NoiseKernel& kernel, std::uint64_t seed) {
  NormalStream rng(seed);
  std::vector<cplx> z(kernel.size());
  for (auto& v : z) v = rng.circular();
  return NoisePath{kernel.nodes(), kernel.apply_factor(z), seed};
}

NoisePath basis_oracle_sample(const WavePacketFamily& family, std::span<const double> nodes,
                              double beta, std::size_t M, double spacing, std::uint64_t seed) {
  family.validate();
  if (M < 1 || M > 128) throw ConfigError("noise_engine: basis truncation M must be in [1, 128]");
  if (!(spacing > 0.0)) throw ConfigError("noise_engine: basis lattice spacing must be > 0");
  if (nodes.empty()) throw ConfigError("noise_engine: oracle needs at least one node");
  const auto m = static_cast<long long>(M);
  const double edge = static_cast<double>(M) * spacing;
  const JapaneseBracketWeight w{beta};
  const double root_d = std::sqrt(spacing);
  const std::size_t n_lattice = 2 * M;

  // a[t][k] = (conj f_t | e_k)_beta and b[t][k] = (f_t | e_k)_beta, k indexing the
  // lattice cell (k - M + 1/2) spacing.
  std::vector<std::vector<cplx>> a(nodes.size(), std::vector<cplx>(n_lattice));
  std::vector<std::vector<cplx>> b(nodes.size(), std::vector<cplx>(n_lattice));
  std::vector<char> row_active(n_lattice, 0);
  std::vector<char> col_active(n_lattice, 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const SpectralPatch f = make_packet(family, nodes[i], spacing);
    const auto& win = f.window();
    if (win.lower() < -edge - 1e-9 * edge || win.upper() > edge + 1e-9 * edge) {
      throw ConfigError("noise_engine: packet window [" + fmt(win.lower()) + ", " +
                        fmt(win.upper()) + "] escapes the truncated basis lattice of radius " +
                        fmt(edge));
    }
    const auto first = static_cast<long long>(std::llround(win.lower() / spacing));
    const auto v = f.values();
    for (std::size_t n = 0; n < v.size(); ++n) {
      const long long cell = first + static_cast<long long>(n);  // xi = (cell + 1/2) spacing
      const double xi = (static_cast<double>(cell) + 0.5) * spacing;
      const double wt = beta == 0.0 ? 1.0 : std::sqrt(w(xi));
      const auto kp = static_cast<std::size_t>(cell + m);
      b[i][kp] = wt * std::conj(v[n]) * root_d;
      if (v[n] != cplx{0.0, 0.0}) col_active[kp] = 1;
      // -xi lies in cell -cell - 1.
      const auto kn = static_cast<std::size_t>(-cell - 1 + m);
      a[i][kn] = wt * v[n] * root_d;
      if (v[n] != cplx{0.0, 0.0}) row_active[kn] = 1;
    }
  }
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  for (std::size_t k = 0; k < n_lattice; ++k) {
    if (row_active[k]) rows.push_back(k);
    if (col_active[k]) cols.push_back(k);
  }
  NormalStream rng(seed);
  std::vector<cplx> out(nodes.size(), cplx{0.0, 0.0});
  std::vector<cplx> x(cols.size());
  for (std::size_t r : rows) {
    for (auto& v : x) v = rng.circular();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (a[i][r] == cplx{0.0, 0.0}) continue;
      cplx acc{0.0, 0.0};
      for (std::size_t c = 0; c < cols.size(); ++c) acc += b[i][cols[c]] * x[c];
      out[i] += a[i][r] * acc;
    }
  }
  return NoisePath{std::vector<double>(nodes.begin(), nodes.end()), std::move(out), seed};
}

}  // namespace wprobe
