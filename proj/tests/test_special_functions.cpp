#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "vcanova/special_functions.hpp"

using namespace vcanova;

TEST_CASE("lower regularized gamma against closed forms") {
  // P(1, x) = 1 - e^-x
  for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
    CHECK(lower_regularized_gamma(1.0, x) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-13));
  }
  // P(1/2, x) = erf(sqrt(x))
  for (double x : {0.01, 0.25, 1.0, 4.0, 9.0}) {
    CHECK(lower_regularized_gamma(0.5, x) ==
          doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-13));
  }
  // P(2, x) = 1 - (1+x) e^-x
  for (double x : {0.5, 1.0, 3.0, 10.0}) {
    CHECK(lower_regularized_gamma(2.0, x) ==
          doctest::Approx(1.0 - (1.0 + x) * std::exp(-x)).epsilon(1e-13));
  }
  CHECK(lower_regularized_gamma(3.0, 0.0) == 0.0);
  CHECK_THROWS_AS(lower_regularized_gamma(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(lower_regularized_gamma(1.0, std::nan("")), std::invalid_argument);
}

TEST_CASE("incomplete beta against closed forms") {
  // I_x(1, 1) = x
  for (double x : {0.1, 0.4, 0.9}) {
    CHECK(regularized_incomplete_beta(1.0, 1.0, x) == doctest::Approx(x).epsilon(1e-14));
  }
  // I_x(2, 2) = x^2 (3 - 2x)
  for (double x : {0.2, 0.5, 0.8}) {
    CHECK(regularized_incomplete_beta(2.0, 2.0, x) ==
          doctest::Approx(x * x * (3.0 - 2.0 * x)).epsilon(1e-13));
  }
  // I_x(a, b) = 1 - I_{1-x}(b, a)
  for (double x : {0.05, 0.3, 0.7, 0.95}) {
    CHECK(regularized_incomplete_beta(2.5, 4.0, x) ==
          doctest::Approx(1.0 - regularized_incomplete_beta(4.0, 2.5, 1.0 - x)).epsilon(1e-12));
  }
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("chi-square(2) is exponential with mean 2") {
  CHECK(chi_square_cdf(2.0 * std::log(2.0), 2.0) == doctest::Approx(0.5).epsilon(1e-13));
  for (double x : {0.3, 1.0, 4.0}) {
    CHECK(chi_square_cdf(x, 2.0) == doctest::Approx(1.0 - std::exp(-0.5 * x)).epsilon(1e-13));
  }
}

TEST_CASE("F(2,2) cdf is x/(1+x)") {
  for (double x : {0.25, 1.0, 3.0, 10.0}) {
    CHECK(f_cdf(x, 2, 2) == doctest::Approx(x / (1.0 + x)).epsilon(1e-13));
    CHECK(f_sf(x, 2, 2) == doctest::Approx(1.0 / (1.0 + x)).epsilon(1e-13));
  }
}

TEST_CASE("F quantile round-trips through the cdf") {
  for (double q : {0.01, 0.1, 0.5, 0.9, 0.99}) {
    for (auto [d1, d2] : {std::pair{1, 2}, {2, 9}, {3, 6}, {10, 20}}) {
      const double x = f_quantile(q, d1, d2);
      CHECK(f_cdf(x, d1, d2) == doctest::Approx(q).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(f_quantile(0.0, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(f_quantile(1.0, 2, 2), std::invalid_argument);
}

TEST_CASE("Kolmogorov tail matches published critical values") {
  CHECK(kolmogorov_tail(1.3581) == doctest::Approx(0.05).epsilon(5e-3));
  CHECK(kolmogorov_tail(1.6276) == doctest::Approx(0.01).epsilon(5e-3));
  CHECK(kolmogorov_tail(1.2238) == doctest::Approx(0.10).epsilon(5e-3));
  CHECK(kolmogorov_tail(0.0) == 1.0);
  CHECK(kolmogorov_tail(5.0) < 1e-15);
  // both series branches against high-precision references
  CHECK(kolmogorov_tail(1.1799) == doctest::Approx(0.12351204971188672).epsilon(1e-12));
  CHECK(kolmogorov_tail(1.1801) == doctest::Approx(0.12339559161939293).epsilon(1e-12));
  CHECK(kolmogorov_tail(0.9) == doctest::Approx(0.39273070794065437).epsilon(1e-12));
  // monotone decreasing
  double prev = 1.0;
  for (double t = 0.05; t < 3.0; t += 0.05) {
    const double q = kolmogorov_tail(t);
    CHECK(q <= prev + 1e-15);
    prev = q;
  }
}
