#include <doctest.h>

#include <cmath>
#include <limits>

#include "hhcert/errors.hpp"
#include "hhcert/special_functions.hpp"
#include "oracles.hpp"

using namespace hhcert;
namespace sf = hhcert::special;

TEST_CASE("gamma at small integers and one half") {
  CHECK(sf::gamma(1.0) == 1.0);
  CHECK(sf::gamma(5.0) == 24.0);
  CHECK(sf::gamma(0.5) == doctest::Approx(1.77245385090552).epsilon(1e-14));
  CHECK(sf::gamma(0.5) == doctest::Approx(std::sqrt(std::acos(-1.0))).epsilon(1e-14));
}

TEST_CASE("sf::gamma(1/2) against the integral of t^(-1/2) e^(-t)") {
  // substitute t = u^2: 2 int_0^inf e^(-u^2) du, truncated where e^(-u^2) < 1e-300
  const double v = 2.0 * oracle::adaptive_simpson([](double u) { return std::exp(-u * u); }, 0.0,
                                                  27.0, 1e-15);
  CHECK(oracle::rel_err(sf::gamma(0.5), v) < 1e-12);
}

TEST_CASE("gamma matches std::tgamma on random arguments") {
  double worst = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const double x = oracle::uniform(1e-3, 170.0);
    worst = std::max(worst, oracle::rel_err(sf::gamma(x), std::tgamma(x)));
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("gamma recurrence") {
  for (int i = 0; i < 2000; ++i) {
    const double x = oracle::uniform(0.1, 80.0);
    CHECK(oracle::rel_err(sf::gamma(x + 1.0), x * sf::gamma(x)) < 1e-12);
  }
}

TEST_CASE("log_gamma agrees with log of gamma and with lgamma") {
  for (int i = 0; i < 1000; ++i) {
    const double x = oracle::uniform(0.05, 160.0);
    CHECK(std::abs(sf::log_gamma(x) - std::lgamma(x)) <
          1e-12 * std::max(1.0, std::abs(std::lgamma(x))));
  }
  CHECK(std::isfinite(sf::log_gamma(1e6)));
}

TEST_CASE("gamma errors") {
  CHECK_THROWS_AS(sf::gamma(0.0), DomainError);
  CHECK_THROWS_AS(sf::gamma(-1.5), DomainError);
  CHECK_THROWS_AS(sf::gamma(std::nan("")), DomainError);
  CHECK_THROWS_AS(sf::gamma(172.0), OverflowError);
  CHECK_NOTHROW(sf::gamma(171.5));
}

TEST_CASE("beta examples") {
  CHECK(sf::beta(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sf::beta(2.0, 3.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  CHECK(sf::beta(0.5, 0.5) == doctest::Approx(std::acos(-1.0)).epsilon(1e-14));
}

TEST_CASE("beta is symmetric") {
  for (int i = 0; i < 2000; ++i) {
    const double x = oracle::uniform(0.01, 300.0), y = oracle::uniform(0.01, 300.0);
    CHECK(sf::beta(x, y) == sf::beta(y, x));
  }
}

TEST_CASE("beta agrees with quadrature of its defining integral") {
  for (int i = 0; i < 40; ++i) {
    const double x = oracle::uniform(0.2, 5.0), y = oracle::uniform(0.2, 5.0);
    const double q = oracle::graded_gl01(
        [x, y](double t, double tc) { return std::pow(t, x - 1.0) * std::pow(tc, y - 1.0); }, 200);
    CAPTURE(x);
    CAPTURE(y);
    CHECK(oracle::rel_err(sf::beta(x, y), q) < 1e-9);
  }
}

TEST_CASE("beta for large arguments stays finite and matches log-space") {
  const double b = sf::beta(200.0, 300.0);
  CHECK(b > 0.0);
  const double lb = std::lgamma(200.0) + std::lgamma(300.0) - std::lgamma(500.0);
  CHECK(oracle::rel_err(std::log(b), lb) < 1e-12);
  CHECK_THROWS_AS(sf::beta(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(sf::beta(1.0, -2.0), DomainError);
}

TEST_CASE("value variants carry an error estimate") {
  const auto g = sf::gamma_value(3.5);
  CHECK(g.value == sf::gamma(3.5));
  CHECK(g.abs_error_estimate > 0.0);
  CHECK(g.abs_error_estimate < 1e-12 * g.value);
  const auto b = sf::beta_value(2.5, 1.5);
  CHECK(b.value == sf::beta(2.5, 1.5));
  CHECK(b.abs_error_estimate > 0.0);
}
