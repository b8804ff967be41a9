#include <doctest.h>

#include <cmath>

#include "hhcert/errors.hpp"
#include "hhcert/fracquad.hpp"
#include "oracles.hpp"

using namespace hhcert;
using namespace hhcert::fracquad;

namespace {
const Interval kUnit(0.0, 1.0);
const Rectangle kSquare(0.0, 1.0, 0.0, 1.0);

double monomial_closed_form(double mu, double alpha, double span) {
  return std::tgamma(mu + 1.0) / std::tgamma(mu + alpha + 1.0) * std::pow(span, mu + alpha);
}
}  // namespace

TEST_CASE("one-dimensional examples") {
  auto one = frac_integral_1d([](double) { return 1.0; }, 0.5, Side::Left, kUnit, 1.0);
  CHECK(one.value == doctest::Approx(1.12837916709551).epsilon(1e-13));
  auto lin = frac_integral_1d([](double t) { return t; }, 0.5, Side::Left, kUnit, 1.0);
  CHECK(lin.value == doctest::Approx(0.75225277806367).epsilon(1e-13));
  auto sq = frac_integral_1d([](double t) { return t * t; }, 1.0, Side::Right, kUnit, 0.0);
  CHECK(sq.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(sq.error_estimate > 0.0);
}

TEST_CASE("two-dimensional examples") {
  const double g15 = std::tgamma(1.5);
  auto one = frac_integral_2d([](double, double) { return 1.0; }, FracOrder(0.5, 0.5),
                              Corner::APlusCPlus, kSquare, 1.0, 1.0);
  CHECK(one.value == doctest::Approx(1.0 / (g15 * g15)).epsilon(1e-13));
  CHECK(one.value == doctest::Approx(1.27323954473516).epsilon(1e-13));
  auto ts = frac_integral_2d([](double t, double s) { return t * s; }, FracOrder(1.0, 1.0),
                             Corner::APlusCPlus, kSquare, 1.0, 1.0);
  CHECK(ts.value == doctest::Approx(0.25).epsilon(1e-14));

  auto f = [](double t, double s) { return t * t * s; };
  auto bd = frac_integral_2d(f, FracOrder(0.5, 2.0), Corner::BMinusDMinus, kSquare, 0.0, 0.0);
  const double want = oracle::rl_2d(f, 0.5, 2.0, 0.0, 1.0, +1, 0.0, 1.0, +1);
  CHECK(oracle::rel_err(bd.value, want) < 1e-8);
  // J_{1-}^{1/2} t^2 at 0 is 1/(2.5 sqrt(pi)); J_{1-}^2 s at 0 is 1/3
  CHECK(oracle::rel_err(bd.value, 1.0 / (7.5 * std::sqrt(std::acos(-1.0)))) < 1e-12);
}

TEST_CASE("every corner against the product-integration oracle") {
  auto f = [](double t, double s) { return std::exp(0.3 * t - s) + t * s * s; };
  const Rectangle r(0.5, 2.0, 0.25, 1.5);
  const FracOrder ord(0.7, 1.6);
  const double x = 1.3, y = 0.8;
  struct Case {
    Corner corner;
    double span_x;
    int sx;
    double span_y;
    int sy;
  };
  const Case cases[] = {{Corner::APlusCPlus, x - r.a(), -1, y - r.c(), -1},
                        {Corner::APlusDMinus, x - r.a(), -1, r.d() - y, +1},
                        {Corner::BMinusCPlus, r.b() - x, +1, y - r.c(), -1},
                        {Corner::BMinusDMinus, r.b() - x, +1, r.d() - y, +1}};
  for (const Case& c : cases) {
    CAPTURE(to_string(c.corner));
    const double got = frac_integral_2d(f, ord, c.corner, r, x, y).value;
    const double want = oracle::rl_2d(f, 0.7, 1.6, x, c.span_x, c.sx, y, c.span_y, c.sy);
    CHECK(oracle::rel_err(got, want) < 1e-8);
  }
}

TEST_CASE("monomial oracle on shifted intervals") {
  const Interval iv(0.5, 2.0);
  for (double mu : {0.0, 1.0, 2.0, 3.0}) {
    for (double alpha : {0.3, 0.5, 1.0, 1.7, 2.0}) {
      for (double x : {2.0, 1.1}) {
        auto r = frac_integral_1d([mu](double t) { return std::pow(t - 0.5, mu); }, alpha,
                                  Side::Left, iv, x);
        CAPTURE(mu);
        CAPTURE(alpha);
        CHECK(oracle::rel_err(r.value, monomial_closed_form(mu, alpha, x - 0.5)) < 1e-8);
      }
    }
  }
}

TEST_CASE("both schemes agree with the oracle for smooth integrands") {
  auto f = [](double t) { return std::cos(2.0 * t) + t; };
  for (Scheme scheme : {Scheme::GradedComposite, Scheme::GaussLegendreDesingularized}) {
    QuadratureSpec spec;
    spec.scheme = scheme;
    for (double alpha : {0.3, 0.5, 1.0}) {
      const double got = frac_integral_1d(f, alpha, Side::Left, kUnit, 0.9, spec).value;
      CHECK(oracle::rel_err(got, oracle::rl_left(f, alpha, 0.0, 0.9)) < 1e-6);
    }
  }
}

TEST_CASE("order one reduces to the ordinary integral") {
  const std::function<double(double)> fs[] = {
      [](double t) { return 1.0 + 2.0 * t - 3.0 * t * t * t; },
      [](double t) { return std::exp(-1.5 * t); },
      [](double t) { return t * t * t * t; }};
  for (const auto& f : fs) {
    auto left = frac_integral_1d(f, 1.0, Side::Left, Interval(-1.0, 2.0), 1.5);
    CHECK(oracle::rel_err(left.value, oracle::adaptive_simpson(f, -1.0, 1.5)) < 1e-8);
    auto right = frac_integral_1d(f, 1.0, Side::Right, Interval(-1.0, 2.0), -0.25);
    CHECK(oracle::rel_err(right.value, oracle::adaptive_simpson(f, -0.25, 2.0)) < 1e-8);
  }
}

TEST_CASE("mirror symmetry between the two sides") {
  const double a = 0.25, b = 1.75;
  auto f = [](double t) { return std::exp(t) * std::sin(t + 0.3); };
  auto g = [&](double t) { return f(a + b - t); };
  for (int i = 0; i < 30; ++i) {
    const double alpha = oracle::uniform(0.2, 3.0);
    const double x = oracle::uniform(a, b - 0.01);
    const double right = frac_integral_1d(f, alpha, Side::Right, Interval(a, b), x).value;
    const double left = frac_integral_1d(g, alpha, Side::Left, Interval(a, b), a + b - x).value;
    CHECK(oracle::rel_err(right, left) < 1e-10);
  }
}

TEST_CASE("separable integrands factor into one-dimensional integrals") {
  auto fx = [](double t) { return 1.0 + t * t; };
  auto fy = [](double s) { return std::exp(-s); };
  const Rectangle r(0.0, 2.0, 1.0, 3.0);
  for (int i = 0; i < 10; ++i) {
    const double alpha = oracle::uniform(0.3, 2.5), beta = oracle::uniform(0.3, 2.5);
    const double x = oracle::uniform(0.1, 2.0), y = oracle::uniform(1.1, 3.0);
    const double two = frac_integral_2d([&](double t, double s) { return fx(t) * fy(s); },
                                        FracOrder(alpha, beta), Corner::APlusCPlus, r, x, y)
                           .value;
    const double one = frac_integral_1d(fx, alpha, Side::Left, r.x(), x).value *
                       frac_integral_1d(fy, beta, Side::Left, r.y(), y).value;
    CHECK(oracle::rel_err(two, one) < 1e-8);
  }
}

TEST_CASE("error estimate does not grow under refinement") {
  auto f = [](double t) { return std::exp(t) / (1.0 + t * t); };
  for (Scheme scheme : {Scheme::GradedComposite, Scheme::GaussLegendreDesingularized}) {
    for (double alpha : {0.5, 1.0}) {
      double previous = -1.0;
      for (int n : {8, 16, 32, 64, 128}) {
        QuadratureSpec spec;
        spec.scheme = scheme;
        spec.nodes_per_axis = n;
        spec.target_rel_tol = 1.0;  // keep coarse levels from throwing
        const double e = frac_integral_1d(f, alpha, Side::Left, kUnit, 1.0, spec).error_estimate;
        if (previous >= 0.0) CHECK(e <= 2.0 * previous);
        previous = e;
      }
    }
  }
}

TEST_CASE("unit rules integrate constants") {
  for (Scheme scheme : {Scheme::GradedComposite, Scheme::GaussLegendreDesingularized}) {
    double s = 0.0;
    for (const UnitNode& n : unit_rule(scheme, 40)) {
      CHECK(n.u > 0.0);
      CHECK(n.uc > 0.0);
      CHECK(n.u <= 1.0);
      CHECK(n.u + n.uc == doctest::Approx(1.0).epsilon(1e-15));
      s += n.weight;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("parsers of enumerations") {
  CHECK(parse_scheme("graded-composite") == Scheme::GradedComposite);
  CHECK(parse_scheme("gauss-legendre-desingularized") == Scheme::GaussLegendreDesingularized);
  CHECK(parse_side("left") == Side::Left);
  CHECK(parse_side("right") == Side::Right);
  for (Corner c : {Corner::APlusCPlus, Corner::APlusDMinus, Corner::BMinusCPlus,
                   Corner::BMinusDMinus})
    CHECK(parse_corner(to_string(c)) == c);
  CHECK_THROWS_AS(parse_scheme("simpson"), Error);
  CHECK_THROWS_AS(parse_corner("a-c-"), Error);
}

TEST_CASE("domain and evaluation errors") {
  CHECK_THROWS_AS(Interval(1.0, 1.0), DomainError);
  CHECK_THROWS_AS(Interval(0.0, INFINITY), DomainError);
  CHECK_THROWS_AS(FracOrder(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(Rectangle(-0.5, 1.0, 0.0, 1.0).require_nonnegative_origin(), DomainError);
  auto one = [](double) { return 1.0; };
  CHECK_THROWS_AS(frac_integral_1d(one, 0.5, Side::Left, kUnit, 0.0), DomainError);
  CHECK_THROWS_AS(frac_integral_1d(one, 0.5, Side::Right, kUnit, 1.0), DomainError);
  CHECK_THROWS_AS(frac_integral_1d(one, 0.5, Side::Left, kUnit, 1.5), DomainError);
  CHECK_THROWS_AS(frac_integral_1d(one, -1.0, Side::Left, kUnit, 1.0), DomainError);
  CHECK_THROWS_AS(frac_integral_1d([](double) { return std::nan(""); }, 0.5, Side::Left, kUnit,
                                   1.0),
                  EvaluationError);
  QuadratureSpec bad;
  bad.nodes_per_axis = 1;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad.nodes_per_axis = 8;
  bad.target_rel_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("non-convergence is reported with the disagreement") {
  QuadratureSpec spec;
  spec.nodes_per_axis = 4;
  spec.target_rel_tol = 1e-14;
  spec.scheme = Scheme::GaussLegendreDesingularized;
  try {
    frac_integral_1d([](double t) { return std::sin(40.0 * t); }, 0.5, Side::Left, kUnit, 1.0,
                     spec);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.disagreement() > 0.0);
  }
}
