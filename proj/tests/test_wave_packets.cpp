#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wprobe/errors.hpp"
#include "wprobe/stats.hpp"
#include "wprobe/wave_packets.hpp"

using namespace wprobe;

namespace {

WavePacketFamily family(double lambda, double x0 = 0.0, double xi0 = 1.0) {
  WavePacketFamily f;
  f.lambda = lambda;
  f.x0 = x0;
  f.xi0 = xi0;
  return f;
}

double sobolev_norm(const SpectralPatch& p, double beta) {
  return std::sqrt(inner_product_sobolev(p, p, JapaneseBracketWeight{beta}).real());
}

}  // namespace

TEST_CASE("profile cutoff values") {
  const auto p = default_profile();
  CHECK(p->sigma(0.4) == 1.0);
  CHECK(p->sigma(0.5) == 1.0);
  CHECK(p->sigma(1.1) == 0.0);
  CHECK(p->sigma(1.0) == 0.0);
  CHECK(p->chi_hat(0.4) == p->b());
  for (double r = 0.0; r < 1.2; r += 0.01) {
    CHECK(p->sigma(r) >= 0.0);
    CHECK(p->sigma(r) <= 1.0);
  }
  CHECK_THROWS_AS(make_profile(0.0), ConfigError);
}

TEST_CASE("b normalizes chi_hat to unit L2 norm") {
  // int sigma(|eta|)^2 d eta by composite Simpson on the bridge.
  const auto p = default_profile();
  const int n = 200000;
  const double h = 0.5 / n;
  double bridge = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double s = p->sigma(0.5 + k * h);
    bridge += w * s * s;
  }
  bridge *= h / 3.0;
  const double integral = 2.0 * (0.5 + bridge);
  CHECK(std::abs(p->b() - 1.0 / std::sqrt(integral)) < 1e-8);
  CHECK(std::abs(p->b() * p->b() * integral - 1.0) < 1e-8);
}

TEST_CASE("cached chi agrees with an independent inverse transform") {
  const auto p = default_profile();
  const oracle::Chi chi(*p);
  for (double y : {0.0, 0.3, 1.7, 5.0, 12.5, 40.0, 101.3, 300.0}) {
    CHECK(std::abs(p->chi(y) - chi(y)) < 1e-9);
    CHECK(std::abs(p->chi_direct(y) - chi(y)) < 1e-9);
    CHECK(p->chi(-y) == doctest::Approx(p->chi(y)));
  }
  CHECK(p->chi_peak() == doctest::Approx(chi(0.0)).epsilon(1e-10));
  CHECK(p->support_radius(1e-10) <= p->cache_radius());
}

TEST_CASE("packet window and support") {
  const auto fam = family(2.0);
  const auto p = make_packet(fam, 10.0);
  const auto& w = p.window();
  CHECK(std::abs(w.center - 100.0) <= w.spacing());
  CHECK(w.half_width >= 10.0);
  CHECK(w.half_width <= 10.0 + 2.0 * w.spacing());
  for (std::size_t n = 0; n < p.size(); ++n) {
    if (std::abs(w.point(n) - 100.0) >= 10.0) CHECK(p.values()[n] == cplx(0.0, 0.0));
  }
  CHECK_THROWS_AS(make_packet(fam, 0.5), ConfigError);
  CHECK_THROWS_AS(family(1.0).validate(), ConfigError);
  CHECK_THROWS_AS(family(2.0, 0.0, 0.5).validate(), ConfigError);
}

TEST_CASE("packet transform matches the closed form") {
  const auto fam = family(2.5, 0.37, -1.0);
  const double t = 3.0;
  const auto p = make_packet(fam, t);
  const double c = -std::pow(t, 2.5);
  for (std::size_t n = 0; n < p.size(); n += 17) {
    const double xi = p.window().point(n);
    const cplx expect = std::polar(1.0, -xi * 0.37) * fam.profile->chi_hat((xi - c) / t) / std::sqrt(t);
    CHECK(std::abs(p.values()[n] - expect) < 1e-14);
  }
}

TEST_CASE("unit L2 norm and Sobolev norm slopes") {
  for (double t : {2.0, 8.0, 32.0}) {
    CHECK(std::abs(make_packet(family(2.0), t).l2_norm() - 1.0) < 1e-6);
  }
  for (auto [beta, lambda] : {std::pair{0.5, 2.0}, std::pair{-0.5, 2.5}}) {
    std::vector<double> ts{4, 8, 16, 32, 64};
    std::vector<double> ns;
    for (double t : ts) ns.push_back(sobolev_norm(make_packet(family(lambda), t), beta));
    const auto fit = fit_loglog(ts, ns);
    CHECK(std::abs(fit.slope - lambda * beta) < 0.05);
  }
}

TEST_CASE("normalized Sobolev norms stay in a fixed band on [4, 64]") {
  for (double beta : {0.5, -0.5, 1.0}) {
    double lo = 1e300;
    double hi = 0.0;
    for (double t = 4.0; t <= 64.0; t *= 1.25) {
      const double r = std::pow(sobolev_norm(make_packet(family(2.0), t), beta), 2) /
                       std::pow(t, 4.0 * beta);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    CHECK(lo > 0.5);
    CHECK(hi < 2.0);
  }
}

TEST_CASE("packet windows never meet reflected windows") {
  for (double lambda : {1.05, 1.5, 2.0, 3.0}) {
    for (double t = 1.01; t < 64.0; t *= 1.1) {
      const auto w = make_packet(family(lambda), t).window();
      // conj(f_s) lives on the negative axis, mirror of a window like w.
      CHECK(w.lower() > -w.spacing());
      CHECK(std::pow(t, lambda) - t > 0.0);
    }
  }
}

TEST_CASE("overlap decay table") {
  const auto fam = family(2.0);
  const auto d = packet_overlap_decay(fam, 8.0, 16);
  for (const auto& s : d.samples) {
    if (s.t == s.s) CHECK(std::abs(s.value - 1.0) < 1e-6);
    CHECK(s.value <= d.constant * s.envelope * (1.0 + 1e-12));
  }
  // |t^2 - s^2| = 4T with T = 8, checked by physical quadrature.
  const oracle::Chi chi(*fam.profile);
  const double t = 8.5;
  const double s = std::sqrt(t * t + 32.0);
  const double v = std::abs(oracle::packet_inner(chi, 0.0, 1.0, 2.0, t, s, 40.0, 0.002));
  CHECK(v <= d.constant / 5.0);
  CHECK_THROWS_AS(packet_overlap_decay(fam, 2.0, 4), ConfigError);
}

TEST_CASE("overlap lower bound on the near-diagonal set") {
  // On D = {|t^lambda - s^lambda| <= T/4}, |(f_t|f_s)| >= b^2 2^{-1/2} |B_{1/4}| with |B_{1/4}| = 1/2.
  // D is a thin strip around the diagonal, so pairs are placed on it directly.
  for (double lambda : {2.0, 2.5}) {
    const auto fam = family(lambda);
    const double b = fam.profile->b();
    const double bound = b * b / std::sqrt(2.0) * 0.5;
    for (double T : {8.0, 16.0}) {
      double worst = 1e300;
      const double d = default_spacing(T);
      for (double t = T; t <= 2.0 * T; t += T / 16.0) {
        for (double g = -0.25 * T; g <= 0.25 * T; g += T / 32.0) {
          const double s = std::pow(std::pow(t, lambda) + g, 1.0 / lambda);
          if (s < T || s > 2.0 * T) continue;
          const double v = std::abs(inner_product_l2(make_packet(fam, t, d), make_packet(fam, s, d)));
          worst = std::min(worst, v);
        }
      }
      CHECK(worst >= bound);
    }
  }
}
