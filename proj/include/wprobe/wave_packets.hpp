#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "wprobe/spectral.hpp"

namespace wprobe {

/// Radial cutoff chi_hat(eta) = b * sigma(|eta|) and its inverse transform chi.
///
/// sigma is 1 on [0, 1/2], 0 on [1, inf) and on (1/2, 1) equals
/// phi(1 - s) / (phi(1 - s) + phi(s)) with s = 2r - 1 and phi(u) = exp(-k / u).
class PacketProfile {
 public:
  explicit PacketProfile(double sharpness);

  double sharpness() const { return sharpness_; }
  double b() const { return b_; }
  double sigma(double r) const;
  double chi_hat(double eta) const { return b_ * sigma(std::abs(eta)); }

  /// chi(y) from the cached table (cubic Hermite); exact quadrature beyond it.
  double chi(double y) const;
  /// chi(y) by direct quadrature of the inverse transform.
  double chi_direct(double y) const;
  double chi_prime_direct(double y) const;
  double chi_peak() const { return peak_; }

  /// Smallest radius beyond which |chi| stays below rel_tol * peak (scanned at
  /// unit steps up to 2000). Valid for rel_tol >= 1e-13.
  double support_radius(double rel_tol) const;
  /// Radius covered by the cached table.
  double cache_radius() const { return cache_radius_; }

  static constexpr std::size_t kCachePoints = std::size_t{1} << 14;

 private:
  void direct_pair(double y, double& value, double& derivative) const;

  double sharpness_;
  double b_ = 0.0;
  double peak_ = 0.0;
  std::vector<double> eta_;       // quadrature nodes on (0, 1)
  std::vector<double> eta_w_;     // b * sigma(eta) * d_eta * sqrt(2 / pi)
  std::vector<double> scan_;      // |chi(k)| for k = 0..kScanMax
  double cache_radius_ = 0.0;
  double cache_step_ = 0.0;
  std::vector<double> cache_value_;
  std::vector<double> cache_slope_;
};

/// Builds the profile; throws ConfigError unless bridge_sharpness > 0.
std::shared_ptr<const PacketProfile> make_profile(double bridge_sharpness = 1.0);
/// Process-wide profile with sharpness 1, built on first use.
std::shared_ptr<const PacketProfile> default_profile();

/// f_t(x) = t^{1/2} chi(t (x - x0)) exp(i t^lambda (x - x0) xi0).
struct WavePacketFamily {
  double x0 = 0.0;
  double xi0 = 1.0;
  double lambda = 2.0;
  std::shared_ptr<const PacketProfile> profile = default_profile();

  /// Throws ConfigError unless lambda > 1, |xi0| = 1 and x0 is finite.
  void validate() const;
  double center(double t) const;
};

/// Default frequency spacing for a packet at scale t.
inline double default_spacing(double t) { return t / 128.0; }

/// Spectral patch of f_t on the lattice of the given spacing (t / 128 when
/// spacing <= 0). The window is [t^lambda xi0 - t, t^lambda xi0 + t] widened to
/// whole lattice cells. Throws ConfigError for t < 1.
SpectralPatch make_packet(const WavePacketFamily& family, double t, double spacing = 0.0);

/// Physical grid covering f_t down to 1e-10 of its peak, fine enough that
/// products of two functions with spectra in `window` are integrated exactly.
PhysicalGrid packet_grid(const WavePacketFamily& family, double t, const FrequencyWindow& window);

struct OverlapSample {
  double t;
  double s;
  double value;     // |(f_t | f_s)|
  double envelope;  // 1 / (1 + |t^lambda - s^lambda| / T)
};

struct OverlapDecay {
  double T = 0.0;
  std::vector<OverlapSample> samples;
  /// Smallest C with value <= C * envelope on every sample.
  double constant = 0.0;
};

/// |(f_t|f_s)| on an n x n midpoint grid of [T, 2T]^2, all packets on the
/// lattice of spacing T / 128. Throws ConfigError unless T > 2^{1/(lambda-1)}.
OverlapDecay packet_overlap_decay(const WavePacketFamily& family, double T, std::size_t n);

}  // namespace wprobe
