#include "wprobe/wave_packets.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "wprobe/errors.hpp"

namespace wprobe {

namespace {

constexpr std::size_t kEtaPoints = 2048;
constexpr int kScanMax = 2000;

}  // namespace

PacketProfile::PacketProfile(double sharpness) : sharpness_(sharpness) {
  if (!(sharpness > 0.0) || !std::isfinite(sharpness)) {
    throw ConfigError("wave_packets: bridge sharpness must be finite and > 0");
  }
  // sigma is flat at both ends of the bridge, so the midpoint rule converges
  // faster than any power here.
  constexpr std::size_t kNormPoints = std::size_t{1} << 16;
  double acc = 0.0;
  for (std::size_t i = 0; i < kNormPoints; ++i) {
    const double r = 0.5 + (static_cast<double>(i) + 0.5) * 0.5 / kNormPoints;
    const double s = sigma(r);
    acc += s * s;
  }
  const double integral = 2.0 * (0.5 + acc * 0.5 / kNormPoints);
  b_ = 1.0 / std::sqrt(integral);

  eta_.resize(kEtaPoints);
  eta_w_.resize(kEtaPoints);
  const double h = 1.0 / kEtaPoints;
  for (std::size_t n = 0; n < kEtaPoints; ++n) {
    eta_[n] = (static_cast<double>(n) + 0.5) * h;
    eta_w_[n] = b_ * sigma(eta_[n]) * h * std::sqrt(2.0 / std::numbers::pi);
  }
  peak_ = std::abs(chi_direct(0.0));

  scan_.resize(kScanMax + 1);
  for (int k = 0; k <= kScanMax; ++k) scan_[static_cast<std::size_t>(k)] = std::abs(chi_direct(k));

  cache_radius_ = support_radius(1e-12);
  cache_step_ = cache_radius_ / static_cast<double>(kCachePoints - 1);
  cache_value_.resize(kCachePoints);
  cache_slope_.resize(kCachePoints);
  for (std::size_t i = 0; i < kCachePoints; ++i) {
    direct_pair(static_cast<double>(i) * cache_step_, cache_value_[i], cache_slope_[i]);
  }
}

double PacketProfile::sigma(double r) const {
  if (r <= 0.5) return 1.0;
  if (r >= 1.0) return 0.0;
  const double s = 2.0 * r - 1.0;
  const double a = std::exp(-sharpness_ / (1.0 - s));
  const double c = std::exp(-sharpness_ / s);
  return a / (a + c);
}

void PacketProfile::direct_pair(double y, double& value, double& derivative) const {
  // chi(y) = sqrt(2/pi) int_0^1 chi_hat(eta) cos(y eta) d eta; phases by recurrence.
  const double h = 1.0 / kEtaPoints;
  const cplx step = std::polar(1.0, y * h);
  cplx phase;
  double v = 0.0;
  double d = 0.0;
  for (std::size_t n = 0; n < kEtaPoints; ++n) {
    if (n % 64 == 0) {
      phase = std::polar(1.0, y * eta_[n]);
    } else {
      phase *= step;
    }
    v += eta_w_[n] * phase.real();
    d -= eta_w_[n] * eta_[n] * phase.imag();
  }
  value = v;
  derivative = d;
}

double PacketProfile::chi_direct(double y) const {
  double v = 0.0;
  double d = 0.0;
  direct_pair(y, v, d);
  return v;
}

double PacketProfile::chi_prime_direct(double y) const {
  double v = 0.0;
  double d = 0.0;
  direct_pair(y, v, d);
  return d;
}

double PacketProfile::chi(double y) const {
  const double a = std::abs(y);
  if (a >= cache_radius_) return chi_direct(a);
  const double u = a / cache_step_;
  const auto i = std::min(static_cast<std::size_t>(u), kCachePoints - 2);
  const double s = u - static_cast<double>(i);
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * cache_value_[i] + h10 * cache_step_ * cache_slope_[i] +
         h01 * cache_value_[i + 1] + h11 * cache_step_ * cache_slope_[i + 1];
}

double PacketProfile::support_radius(double rel_tol) const {
  const double cut = rel_tol * peak_;
  int last = 0;
  for (int k = kScanMax; k >= 0; --k) {
    if (scan_[static_cast<std::size_t>(k)] > cut) {
      last = k;
      break;
    }
  }
  return static_cast<double>(last + 1);
}

std::shared_ptr<const PacketProfile> make_profile(double bridge_sharpness) {
  return std::make_shared<const PacketProfile>(bridge_sharpness);
}

std::shared_ptr<const PacketProfile> default_profile() {
  static std::once_flag once;
  static std::shared_ptr<const PacketProfile> profile;
  std::call_once(once, [] { profile = make_profile(1.0); });
  return profile;
}

void WavePacketFamily::validate() const {
  if (!(lambda > 1.0) || !std::isfinite(lambda)) {
    throw ConfigError("wave_packets: lambda must be finite and > 1");
  }
  if (std::abs(xi0) != 1.0) throw ConfigError("wave_packets: xi0 must be -1 or +1");
  if (!std::isfinite(x0)) throw ConfigError("wave_packets: x0 must be finite");
  if (!profile) throw ConfigError("wave_packets: family has no profile");
}

double WavePacketFamily::center(double t) const { return std::pow(t, lambda) * xi0; }

SpectralPatch make_packet(const WavePacketFamily& family, double t, double spacing) {
  family.validate();
  if (!(t >= 1.0) || !std::isfinite(t)) {
    throw ConfigError("wave_packets: packet scale t must be finite and >= 1");
  }
  if (spacing <= 0.0) spacing = default_spacing(t);
  const double c = family.center(t);
  const FrequencyWindow w = FrequencyWindow::on_lattice(c - t, c + t, spacing);
  std::vector<cplx> values(w.num_points);
  const double amp = 1.0 / std::sqrt(t);
  const auto& prof = *family.profile;
  for (std::size_t n = 0; n < w.num_points; ++n) {
    const double xi = w.point(n);
    const double env = prof.chi_hat((xi - c) / t);
    values[n] = env == 0.0 ? cplx{0.0, 0.0} : std::polar(amp * env, -xi * family.x0);
  }
  return SpectralPatch(w, std::move(values));
}

PhysicalGrid packet_grid(const WavePacketFamily& family, double t, const FrequencyWindow& window) {
  const double r = family.profile->support_radius(1e-10) / t;
  return PhysicalGrid{family.x0, r, std::numbers::pi / (2.0 * window.half_width)};
}

OverlapDecay packet_overlap_decay(const WavePacketFamily& family, double T, std::size_t n) {
  family.validate();
  if (!(T > std::pow(2.0, 1.0 / (family.lambda - 1.0)))) {
    throw ConfigError("wave_packets: overlap decay needs T > 2^{1/(lambda-1)}");
  }
  if (n < 1) throw ConfigError("wave_packets: overlap grid needs at least one point");
  const double spacing = default_spacing(T);
  std::vector<double> ts(n);
  std::vector<SpectralPatch> patches;
  patches.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = T + T * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    patches.push_back(make_packet(family, ts[i], spacing));
  }
  OverlapDecay out;
  out.T = T;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = std::abs(inner_product_l2(patches[i], patches[j]));
      const double gap = std::abs(std::pow(ts[i], family.lambda) - std::pow(ts[j], family.lambda));
      const double env = 1.0 / (1.0 + gap / T);
      out.samples.push_back({ts[i], ts[j], v, env});
      out.constant = std::max(out.constant, v / env);
    }
  }
  return out;
}

}  // namespace wprobe
