#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wprobe/spectral.hpp"
#include "wprobe/wave_packets.hpp"

namespace wprobe {

/// Covariance C_ts = |(f_t | f_s)_beta|^2 of the error values E_beta(conj f_t, f_t)
/// over a node set, stored as a band plus a factor used for sampling.
///
/// Entries vanish exactly when two packet windows are disjoint, so large node
/// sets are banded. Small or dense kernels are factored as V sqrt(D) V^T from
/// a symmetric eigendecomposition; large banded ones by a banded LDL^T.
class NoiseKernel {
 public:
  enum class Route { Eigen, BandedLDLT };

  /// `band[i][d]` holds C(i, i - d) for d = 0 .. bandwidth (entries with i - d < 0
  /// are ignored). Throws NumericalError when the matrix has an eigenvalue (or
  /// LDL^T pivot) below -1e-10 * trace; smaller negative parts are clipped.
  NoiseKernel(std::vector<double> nodes, double beta, double spacing, std::size_t bandwidth,
              std::vector<std::vector<double>> band);

  const std::vector<double>& nodes() const { return nodes_; }
  double beta() const { return beta_; }
  /// Frequency lattice spacing the entries were computed on.
  double spacing() const { return spacing_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t bandwidth() const { return bandwidth_; }
  Route route() const { return route_; }

  double operator()(std::size_t i, std::size_t j) const;
  double trace() const;
  Eigen::MatrixXd dense() const;
  /// w^T C w.
  double quadratic(std::span<const double> w) const;
  /// L z for the sampling factor L (L L^T = C after clipping).
  std::vector<cplx> apply_factor(std::span<const cplx> z) const;
  /// The sampling factor as a dense matrix (tests and diagnostics).
  Eigen::MatrixXd factor_dense() const;

 private:
  void factor_eigen();
  void factor_banded();

  std::vector<double> nodes_;
  double beta_;
  double spacing_;
  std::size_t bandwidth_;
  std::vector<std::vector<double>> band_;
  Route route_ = Route::Eigen;
  Eigen::MatrixXd sym_factor_;
  std::vector<std::vector<double>> l_band_;  // unit lower factor, same layout as band_
  std::vector<double> root_d_;
};

/// One joint sample of {E_beta(conj f_t, f_t)} over the kernel nodes.
struct NoisePath {
  std::vector<double> nodes;
  std::vector<cplx> values;
  std::uint64_t seed = 0;
};

/// Lattice spacing used for a node set: min(nodes) / 128.
double kernel_spacing(std::span<const double> nodes);

/// Kernel over `nodes` with packets on one lattice (spacing <= 0 selects
/// kernel_spacing(nodes)). Throws ConfigError for an empty node set or t < 1.
NoiseKernel build_kernel(const WavePacketFamily& family, std::span<const double> nodes,
                         double beta, double spacing = 0.0);

NoisePath sample_path(const NoiseKernel& kernel, std::uint64_t seed);

/// Explicit finite-basis realization sum_{n,m} (conj f_t|e_n)_beta (f_t|e_m)_beta X_nm
/// on the lattice {(k + 1/2) spacing : -M <= k < M}, with X_nm independent
/// circular standard Gaussians. Throws ConfigError when M is outside [1, 128]
/// or a packet window leaves the truncated lattice.
NoisePath basis_oracle_sample(const WavePacketFamily& family, std::span<const double> nodes,
                              double beta, std::size_t M, double spacing, std::uint64_t seed);

}  // namespace wprobe
