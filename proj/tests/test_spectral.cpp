#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wprobe/errors.hpp"
#include "wprobe/spectral.hpp"
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

}  // namespace

TEST_CASE("window grid uses midpoints") {
  const FrequencyWindow w{10.0, 2.0, 8};
  CHECK(w.spacing() == doctest::Approx(0.5));
  CHECK(w.point(0) == doctest::Approx(8.25));
  CHECK(w.point(7) == doctest::Approx(11.75));
  CHECK_THROWS_AS(FrequencyWindow({0.0, 1.0, 1}).validate(), ConfigError);
  CHECK_THROWS_AS(FrequencyWindow({0.0, 0.0, 4}).validate(), ConfigError);
}

TEST_CASE("on_lattice windows are made of lattice cells") {
  const double d = 0.25;
  const auto w = FrequencyWindow::on_lattice(1.1, 2.9, d);
  CHECK(w.lower() <= 1.1);
  CHECK(w.upper() >= 2.9);
  CHECK(w.spacing() == doctest::Approx(d));
  const double k = w.lower() / d;
  CHECK(std::abs(k - std::round(k)) < 1e-12);
}

TEST_CASE("patch validation") {
  const FrequencyWindow w{0.0, 1.0, 4};
  CHECK_THROWS_AS(SpectralPatch(w, std::vector<cplx>(3)), ConfigError);
  CHECK_THROWS_AS(SpectralPatch(w, std::vector<cplx>(4), 2), ConfigError);
  std::vector<cplx> bad(4);
  bad[2] = cplx(NAN, 0.0);
  CHECK_THROWS_AS(SpectralPatch(w, bad), ConfigError);
}

TEST_CASE("unit packet has unit norm") {
  const auto fam = family(2.0, 0.3);
  for (double t : {2.0, 8.0, 32.0}) {
    const auto p = make_packet(fam, t);
    CHECK(std::abs(inner_product_l2(p, p) - 1.0) < 1e-6);
    CHECK(std::abs(p.l2_norm() - 1.0) < 1e-6);
  }
}

TEST_CASE("disjoint windows give exactly zero") {
  const SpectralPatch a(FrequencyWindow{-100.0, 1.0, 16}, std::vector<cplx>(16, cplx(1.0, 2.0)));
  const SpectralPatch b(FrequencyWindow{100.0, 1.0, 16}, std::vector<cplx>(16, cplx(3.0, -1.0)));
  CHECK(inner_product_l2(a, b) == cplx(0.0, 0.0));
  CHECK(inner_product_sobolev(a, b, JapaneseBracketWeight{0.7}) == cplx(0.0, 0.0));
}

TEST_CASE("touching windows t = 2, s = 3 at lambda = 2 have zero overlap") {
  // [2, 6] and [6, 12]: the transforms share no interior point.
  const auto fam = family(2.0);
  const auto a = make_packet(fam, 2.0, 1.0 / 64.0);
  const auto b = make_packet(fam, 3.0, 1.0 / 64.0);
  CHECK(std::abs(inner_product_l2(a, b)) < 1e-12);
  const oracle::Chi chi(*fam.profile);
  CHECK(std::abs(oracle::packet_inner(chi, 0.0, 1.0, 2.0, 2.0, 3.0)) < 1e-6);
}

TEST_CASE("overlapping packets match physical-space quadrature") {
  const auto fam = family(2.0, 0.3);
  const oracle::Chi chi(*fam.profile);
  for (auto [t, s] : {std::pair{2.0, 2.5}, std::pair{2.0, 2.2}, std::pair{4.0, 4.3}}) {
    const cplx expect = oracle::packet_inner(chi, 0.3, 1.0, 2.0, t, s);
    // Shared lattice.
    const double d = t / 128.0;
    const cplx same = inner_product_l2(make_packet(fam, t, d), make_packet(fam, s, d));
    CHECK(std::abs(same - expect) < 1e-6);
    // Each packet on its own lattice: goes through resampling.
    const cplx cross = inner_product_l2(make_packet(fam, t), make_packet(fam, s));
    CHECK(std::abs(cross - expect) < 1e-6);
  }
}

TEST_CASE("inner product is conjugate symmetric") {
  const auto fam = family(2.5, -0.2);
  const auto a = make_packet(fam, 3.0);
  const auto b = make_packet(fam, 3.1);
  const cplx ab = inner_product_l2(a, b);
  const cplx ba = inner_product_l2(b, a);
  CHECK(std::abs(ab - std::conj(ba)) <= 1e-15 * std::abs(ab) + 1e-300);
  const JapaneseBracketWeight w{0.5};
  const cplx abw = inner_product_sobolev(a, b, w);
  const cplx baw = inner_product_sobolev(b, a, w);
  CHECK(std::abs(abw - std::conj(baw)) <= 1e-15 * std::abs(abw));
}

TEST_CASE("beta = 0 Sobolev product is the L2 product bit for bit") {
  const auto fam = family(2.0);
  const auto a = make_packet(fam, 5.0);
  const auto b = make_packet(fam, 5.2);
  const cplx l2 = inner_product_l2(a, b);
  const cplx h0 = inner_product_sobolev(a, b, JapaneseBracketWeight{0.0});
  CHECK(l2.real() == h0.real());
  CHECK(l2.imag() == h0.imag());
}

TEST_CASE("Sobolev product against a direct weighted sum") {
  const FrequencyWindow w{3.0, 2.0, 40};
  std::vector<cplx> f(40);
  std::vector<cplx> g(40);
  for (std::size_t n = 0; n < 40; ++n) {
    const double xi = w.point(n);
    f[n] = cplx(std::cos(xi), std::sin(2.0 * xi));
    g[n] = cplx(xi * xi, -1.0 / (1.0 + xi));
  }
  cplx expect{0.0, 0.0};
  for (std::size_t n = 0; n < 40; ++n) {
    const double xi = w.point(n);
    expect += std::pow(1.0 + xi * xi, -0.75) * std::conj(f[n]) * g[n] * w.spacing();
  }
  const cplx got = inner_product_sobolev(SpectralPatch(w, f), SpectralPatch(w, g),
                                         JapaneseBracketWeight{-0.75});
  CHECK(std::abs(got - expect) < 1e-13);
  CHECK(JapaneseBracketWeight{-3.0}(1e3) > 0.0);
}

TEST_CASE("evaluate_physical at the packet center") {
  const auto fam = family(2.0, 0.4);
  const oracle::Chi chi(*fam.profile);
  for (double t : {2.0, 8.0}) {
    const auto p = make_packet(fam, t);
    const std::vector<double> x{0.4, 0.4 + 0.7 / t};
    const auto v = evaluate_physical(p, x);
    CHECK(std::abs(v[0] - std::sqrt(t) * chi(0.0)) < 1e-8);
    CHECK(std::abs(v[1] - oracle::packet(chi, 0.4, 1.0, 2.0, t, x[1])) < 1e-8);
  }
  const SpectralPatch zero(FrequencyWindow{1.0, 1.0, 8}, std::vector<cplx>(8));
  const std::vector<double> x{-1.0, 0.0, 2.5};
  for (const auto& v : evaluate_physical(zero, x)) CHECK(v == cplx(0.0, 0.0));
}

TEST_CASE("resampling a band-limited patch") {
  // Samples of a packet transform on a coarse lattice, moved to an offset one.
  const auto fam = family(2.0);
  const auto p = make_packet(fam, 6.0, 6.0 / 128.0);
  const auto& w = p.window();
  const FrequencyWindow target{w.center + 0.013, w.half_width * 0.8, 300};
  const auto r = resample(p, target);
  double worst = 0.0;
  for (std::size_t i = 0; i < target.num_points; ++i) {
    const double xi = target.point(i);
    const double eta = (xi - 36.0) / 6.0;
    const cplx exact = fam.profile->chi_hat(eta) / std::sqrt(6.0);
    worst = std::max(worst, std::abs(r.values()[i] - exact));
  }
  CHECK(worst < 1e-6);
}
