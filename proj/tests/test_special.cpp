#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <stdexcept>

#include "entroscope/special.hpp"

using namespace entroscope;

TEST_CASE("digamma matches known values") {
  const double gamma_e = 0.57721566490153286;
  CHECK(digamma(1.0) == doctest::Approx(-gamma_e).epsilon(1e-12));
  CHECK(digamma(2.0) == doctest::Approx(1.0 - gamma_e).epsilon(1e-12));
  CHECK(digamma(0.5) == doctest::Approx(-gamma_e - 2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(digamma(4.0) == doctest::Approx(1.0 - gamma_e + 0.5 + 1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("incomplete beta basics") {
  CHECK(beta_inc(2, 2, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(beta_inc(2, 2, 0.0) == 0.0);
  CHECK(beta_inc(2, 2, 1.0) == 1.0);
  // CDF of Beta(2,2) is 3x^2 - 2x^3
  for (double x : {0.1, 0.25, 0.7, 0.95})
    CHECK(beta_inc(2, 2, x) == doctest::Approx(3 * x * x - 2 * x * x * x).epsilon(1e-10));
  for (double p : {0.01, 0.3, 0.5, 0.8, 0.999})
    CHECK(beta_inc(2, 2, beta_inc_inv(2, 2, p)) == doctest::Approx(p).epsilon(1e-10));
}

TEST_CASE("beta entropy closed form") {
  // H = ln B(2,2) - 2(psi(2) - psi(4)) = -ln 6 + 5/3
  CHECK(beta_entropy(2, 2) == doctest::Approx(-0.12509280256138866).epsilon(1e-12));
  CHECK(beta_entropy(1, 1) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("xlogx extension") {
  CHECK(xlogx(0.0) == 0.0);
  CHECK(xlogx(1.0) == 0.0);
  CHECK(xlogx(std::exp(1.0)) == doctest::Approx(std::exp(1.0)));
}
