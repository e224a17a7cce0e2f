#pragma once

#include <cstdint>
#include <random>

#include "wprobe/spectral.hpp"

namespace wprobe {

/// What a random stream is used for; part of the stream key.
enum class Purpose : std::uint64_t {
  NoisePath = 1,
  BasisOracle = 2,
  PlainNoise = 3,
  AveragedNoise = 4,
  Trajectory = 5,
  Verification = 6,
};

/// Counter-based stream key: the same (master, trial, purpose, index) always
/// gives the same seed, independent of which worker asks for it.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, Purpose purpose,
                          std::uint64_t index = 0);

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return dist_(engine_); }
  /// Circularly symmetric complex Gaussian with E|z|^2 = 1.
  cplx circular() {
    const double re = dist_(engine_);
    const double im = dist_(engine_);
    return {re * kHalfRoot, im * kHalfRoot};
  }

 private:
  static constexpr double kHalfRoot = 0.70710678118654752440;
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace wprobe
