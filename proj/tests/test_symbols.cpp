#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wprobe/errors.hpp"
#include "wprobe/stats.hpp"
#include "wprobe/symbols.hpp"

using namespace wprobe;

namespace {

HomogeneousTerm term(double order, const char* c, double h_minus = 1.0, double h_plus = 1.0) {
  HomogeneousTerm t;
  t.order = order;
  t.coefficient = ProductCoefficient{Expression::parse(c), h_minus, h_plus};
  return t;
}

WavePacketFamily family(double lambda, double x0 = 0.0, double xi0 = 1.0) {
  WavePacketFamily f;
  f.lambda = lambda;
  f.x0 = x0;
  f.xi0 = xi0;
  return f;
}

cplx form(const WavePacketFamily& fam, double t, const Observable& P,
          QuadraturePath path = QuadraturePath::Auto) {
  const auto f = make_packet(fam, t);
  return quadratic_form(f, P, packet_grid(fam, t, f.window()), path);
}

}  // namespace

TEST_CASE("expression grammar") {
  CHECK(Expression::parse("1 + 2*3")(0.0) == 7.0);
  CHECK(Expression::parse("2^3^2")(0.0) == 512.0);
  CHECK(Expression::parse("-2^2")(0.0) == -4.0);
  CHECK(Expression::parse("(1 - x) / 4")(3.0) == -0.5);
  CHECK(Expression::parse("sin(x)^2 + cos(x)^2")(0.7) == doctest::Approx(1.0));
  CHECK(Expression::parse("exp(-x*x) * pi")(0.0) == doctest::Approx(M_PI));
  CHECK(Expression::parse("1e-3 * x")(2.0) == doctest::Approx(2e-3));
  CHECK_FALSE(Expression::parse("3 + sin(2)").depends_on_x());
  CHECK(Expression::parse("3 + sin(x)").depends_on_x());
  CHECK(Expression::constant(0.1)(5.0) == 0.1);
  CHECK(Expression()(1.0) == 0.0);
  for (const char* bad : {"", "1 +", "sin x", "tan(x)", "(1", "1 2", "x $ 2"}) {
    CHECK_THROWS_AS(Expression::parse(bad), ConfigError);
  }
}

TEST_CASE("expression text reparses to the same function") {
  const auto e = Expression::parse("  0.5*cos(3*x) - x^2  ");
  const auto again = Expression::parse(e.text());
  CHECK(e == again);
  for (double x : {-1.0, 0.2, 2.5}) CHECK(e(x) == again(x));
}

TEST_CASE("tabulated coefficient interpolates and extends linearly") {
  std::vector<double> xs;
  std::vector<cplx> minus, plus;
  for (int k = 0; k <= 20; ++k) {
    const double x = -1.0 + 0.1 * k;
    xs.push_back(x);
    minus.emplace_back(2.0 * x + 1.0, -x);
    plus.emplace_back(std::sin(x), 0.0);
  }
  const TabulatedCoefficient tab(xs, minus, plus);
  CHECK(std::abs(tab(0.33, -1) - cplx(1.66, -0.33)) < 1e-12);
  CHECK(std::abs(tab(0.33, 1) - std::sin(0.33)) < 1e-4);
  // Beyond the table a linear function is continued exactly.
  CHECK(std::abs(tab(1.5, -1) - cplx(4.0, -1.5)) < 1e-12);
  CHECK_THROWS_AS(TabulatedCoefficient({0.0, 0.0, 1.0}, {1, 1, 1}, {1, 1, 1}), ConfigError);
}

TEST_CASE("eval_symbol examples") {
  CHECK(eval_symbol(term(0.0, "1"), 0.3, 3.0) == cplx(1.0, 0.0));
  const auto xi = term(1.0, "1", -1.0, 1.0);
  CHECK(eval_symbol(xi, 0.0, 5.0) == cplx(5.0, 0.0));
  CHECK(eval_symbol(xi, 0.0, -5.0) == cplx(-5.0, 0.0));
  const auto h = term(1.5, "1 + x");
  const cplx ratio = eval_symbol(h, 0.4, 2.0) / eval_symbol(h, 0.4, 1.0);
  CHECK(std::abs(ratio - std::pow(2.0, 1.5)) < 1e-14);
  // Cutoff region.
  CHECK(eval_symbol(term(0.0, "1"), 0.0, 0.2) == cplx(0.0, 0.0));
  const double mid = eval_symbol(term(0.0, "1"), 0.0, 0.375).real();
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
}

TEST_CASE("homogeneity holds for random dilations") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> scale(1.0, 50.0);
  std::uniform_real_distribution<double> freq(0.5, 20.0);
  std::uniform_real_distribution<double> xs(-2.0, 2.0);
  const auto a = term(-0.7, "2 + sin(x)", 0.3, -1.2);
  for (int i = 0; i < 500; ++i) {
    const double t = scale(rng);
    const double xi = freq(rng) * (i % 2 ? -1.0 : 1.0);
    const double x = xs(rng);
    const cplx lhs = eval_symbol(a, x, t * xi);
    const cplx rhs = std::pow(t, -0.7) * eval_symbol(a, x, xi);
    CHECK(std::abs(lhs - rhs) <= 1e-13 * std::abs(rhs));
  }
}

TEST_CASE("expansion needs strictly decreasing orders") {
  CHECK_THROWS_AS(SymbolExpansion({term(0.0, "1"), term(1.0, "1")}), ConfigError);
  CHECK_THROWS_AS(SymbolExpansion({term(0.0, "1"), term(0.0, "1")}), ConfigError);
  CHECK_THROWS_AS(SymbolExpansion(std::vector<HomogeneousTerm>{}), ConfigError);
  CHECK_THROWS_AS(SymbolExpansion({term(0.0, "1")}, RemainderTerm{0.5, Expression::parse("1")}),
                  ConfigError);
  try {
    SymbolExpansion({term(1.0, "1"), term(2.0, "1")});
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("strictly decrease") != std::string::npos);
  }
}

TEST_CASE("identity symbol gives the squared norm") {
  const Observable P{SymbolExpansion({term(0.0, "1")})};
  for (double t : {2.0, 8.0, 32.0}) {
    CHECK(std::abs(form(family(2.0, 0.1), t, P) - 1.0) < 1e-6);
    CHECK(std::abs(form(family(2.0, 0.1), t, P, QuadraturePath::Full) - 1.0) < 1e-6);
  }
}

TEST_CASE("a = xi gives t^lambda xi0") {
  const Observable P{SymbolExpansion({term(1.0, "1", -1.0, 1.0)})};
  for (double xi0 : {1.0, -1.0}) {
    for (double t : {2.0, 8.0}) {
      const auto fam = family(2.0, 0.0, xi0);
      const double expect = std::pow(t, 2.0) * xi0;
      CHECK(std::abs(form(fam, t, P, QuadraturePath::Fast) - expect) < 1e-6 * std::abs(expect));
      CHECK(std::abs(form(fam, t, P, QuadraturePath::Full) - expect) < 1e-6 * std::abs(expect));
    }
  }
}

TEST_CASE("x-dependent first-order symbol against physical quadrature") {
  // (f | c(x) D f) = int c(x) t [t^lambda xi0 chi(tu)^2 - i t chi(tu) chi'(tu)] dx, u = x - x0.
  const double x0 = 0.3;
  const double t = 4.0;
  const double lambda = 2.0;
  const auto fam = family(lambda, x0);
  const oracle::Chi chi(*fam.profile);
  const auto c = [](double x) { return 1.0 + 0.5 * std::sin(x); };
  const cplx expect = oracle::trapezoid(
      [&](double x) {
        const double y = t * (x - x0);
        const double k = chi(y);
        return c(x) * t * cplx(std::pow(t, lambda) * k * k, -t * k * chi.derivative(y));
      },
      x0 - 100.0, x0 + 100.0, 0.005);
  const Observable P{SymbolExpansion({term(1.0, "1 + 0.5*sin(x)", -1.0, 1.0)})};
  const cplx got = form(fam, t, P);
  CHECK(std::abs(got - expect) < 1e-6 * std::pow(t, lambda));
  CHECK_THROWS_AS(form(fam, t, P, QuadraturePath::Fast), ConfigError);
}

TEST_CASE("fast and full paths agree for x-independent symbols") {
  const Observable P{SymbolExpansion({term(1.0, "2", -0.5, 1.0), term(-0.5, "0.3", 1.0, 2.0)})};
  for (double t : {3.0, 16.0}) {
    const auto fam = family(2.5, -0.4, -1.0);
    const cplx fast = form(fam, t, P, QuadraturePath::Fast);
    const cplx full = form(fam, t, P, QuadraturePath::Full);
    CHECK(std::abs(fast - full) < 1e-8 * std::abs(fast));
  }
}

TEST_CASE("quadratic form is additive over terms") {
  const auto a = term(1.0, "1 + 0.5*sin(x)", -1.0, 1.0);
  const auto b = term(0.0, "0.5*cos(x)");
  const auto fam = family(2.0, 0.2);
  const auto f = make_packet(fam, 8.0);
  const auto grid = packet_grid(fam, 8.0, f.window());
  const cplx sum = quadratic_form(f, Observable{SymbolExpansion({a, b})}, grid);
  const cplx parts = quadratic_form(f, a, grid) + quadratic_form(f, b, grid);
  CHECK(std::abs(sum - parts) < 1e-10 * std::abs(sum));
}

TEST_CASE("order zero remainder stays bounded") {
  RemainderTerm r;
  r.order = 0.0;
  r.c = Expression::parse("1 + 0.5*cos(2*x)");
  const auto fam = family(2.0, 0.1);
  double hi = 0.0;
  for (double t : {8.0, 16.0, 32.0}) {
    const auto f = make_packet(fam, t);
    hi = std::max(hi, std::abs(quadratic_form(f, r, packet_grid(fam, t, f.window()))));
  }
  CHECK(hi <= 1.5 + 1e-6);
}

TEST_CASE("low-frequency cutoff does not reach packet spectra") {
  const auto fam = family(2.0, 0.1);
  cplx ref;
  for (double start : {0.25, 0.125, 0.0}) {
    auto a = term(1.0, "1 + 0.5*sin(x)", -1.0, 1.0);
    auto b = term(0.0, "0.5*cos(x)");
    a.cutoff.bridge_start = start;
    b.cutoff.bridge_start = start;
    const cplx v = form(fam, 2.0, Observable{SymbolExpansion({a, b})});
    if (start == 0.25) {
      ref = v;
    } else {
      CHECK(std::abs(v - ref) <= 1e-12 * std::abs(ref));
    }
  }
}

TEST_CASE("single exact term with constant coefficient has no asymptotic error") {
  const Observable P{SymbolExpansion({term(1.0, "1.7", -1.0, 1.0)})};
  const std::vector<double> ts{8, 16, 32, 64};
  for (double e : asymptotic_error_probe(P, family(2.0, 0.3), ts)) CHECK(e < 1e-8);
}

TEST_CASE("asymptotic error decays at least at the predicted rate") {
  // Prediction -min(1, lambda (m1 - m2), lambda - 1) is an upper bound on the
  // slope; for m1 = 1, m2 = 0, lambda = 2 the O(1/t) part cancels for real chi
  // and the observed decay is faster.
  const Observable P{SymbolExpansion({term(1.0, "1 + 0.5*sin(x)", -1.0, 1.0), term(0.0, "0.5*cos(x)")})};
  const std::vector<double> ts{8, 16, 32, 64};
  const auto err = asymptotic_error_probe(P, family(2.0, 0.3), ts);
  const auto fit = fit_loglog(ts, err);
  CHECK(fit.slope <= -1.0 + 0.2);
  CHECK(err.back() < 0.05);
}

TEST_CASE("asymptotic slope follows lambda (m1 - m2) when it dominates") {
  for (auto [m2, lambda] : {std::pair{0.6, 2.0}, std::pair{0.75, 2.5}}) {
    const Observable P{SymbolExpansion({term(1.0, "1 + 0.5*sin(x)", -1.0, 1.0), term(m2, "0.5*cos(x)")})};
    const std::vector<double> ts{8, 16, 32, 64};
    const auto fit = fit_loglog(ts, asymptotic_error_probe(P, family(lambda, 0.3), ts));
    const double expect = -std::min({1.0, lambda * (1.0 - m2), lambda - 1.0});
    CHECK(std::abs(fit.slope - expect) < 0.2);
  }
}

TEST_CASE("large lambda with constant coefficients gives slope -lambda (m1 - m2)") {
  const Observable P{SymbolExpansion({term(1.0, "1", -1.0, 1.0), term(0.0, "0.5")})};
  const std::vector<double> ts{8, 16, 32, 64};
  for (double lambda : {1.5, 3.0}) {
    const auto fit = fit_loglog(ts, asymptotic_error_probe(P, family(lambda, 0.0), ts));
    CHECK(std::abs(fit.slope + lambda) < 0.2);
  }
}
