#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "pspin/common.hpp"
#include "pspin/numerics.hpp"
#include "pspin/special.hpp"

using namespace pspin;

TEST_CASE("normal functions against boost") {
  const boost::math::normal_distribution<double> nd;
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    CHECK(normal_pdf(x) == doctest::Approx(boost::math::pdf(nd, x)).epsilon(1e-13));
    CHECK(normal_cdf(x) == doctest::Approx(boost::math::cdf(nd, x)).epsilon(1e-13));
  }
  for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.99, 1 - 1e-9}) {
    CHECK(normal_quantile(p) == doctest::Approx(boost::math::quantile(nd, p)).epsilon(1e-11));
  }
  for (double s : {1e-15, 1e-8, 0.1, 1.0, 1.9}) {
    const double ref = boost::math::quantile(boost::math::complement(nd, s / 2));
    CHECK(normal_upper_half_quantile(s) == doctest::Approx(ref).epsilon(1e-11));
  }
}

TEST_CASE("binary entropy and binomials") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  CHECK(binary_entropy(0.2) == doctest::Approx(binary_entropy(0.8)).epsilon(1e-15));
  for (int n : {5, 20, 40, 60}) {
    for (int k = 0; k <= n; k += 3) {
      CHECK(binomial(n, k) == doctest::Approx(boost::math::binomial_coefficient<double>(n, k)).epsilon(1e-14));
    }
  }
}

TEST_CASE("hermite rule integrates gaussian moments") {
  const auto& rule = hermite201();
  CHECK(rule.nodes.size() == 201);
  CHECK(gaussian_expectation(rule, 0.0, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gaussian_expectation(rule, 0.0, [](double z) { return z * z; }) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(gaussian_expectation(rule, 0.0, [](double z) { return std::pow(z, 4); }) ==
        doctest::Approx(3.0).epsilon(1e-12));
  CHECK(gaussian_expectation(rule, 1.5, [](double z) { return z; }) == doctest::Approx(1.5).epsilon(1e-13));
  const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double z) { return std::cosh(0.7 * z) * normal_pdf(z); }, -40.0, 40.0, 10, 1e-14);
  CHECK(gaussian_expectation(rule, 0.0, [](double z) { return std::cosh(0.7 * z); }) ==
        doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("adaptive simpson against gauss kronrod") {
  auto f = [](double x) { return std::sqrt(x) * std::exp(-x); };
  const auto r = adaptive_simpson(f, 0.0, 3.0, 1e-11);
  CHECK(r.converged);
  const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 3.0, 15, 1e-14);
  CHECK(r.value == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("golden section and bisection") {
  const auto m = golden_section([](double x) { return (x - 0.3) * (x - 0.3) + 2.0; }, 0.0, 1.0, 1e-10);
  // a quadratic pins its argmin only to about sqrt(machine eps)
  CHECK(std::abs(m.x - 0.3) < 1e-7);
  CHECK(m.value == doctest::Approx(2.0).epsilon(1e-14));
  const auto b = bisect_predicate([](double x) { return x * x > 2.0; }, 0.0, 2.0, 1e-12);
  CHECK(b.lo <= std::sqrt(2.0));
  CHECK(b.hi >= std::sqrt(2.0));
  CHECK(b.hi - b.lo <= 1e-12);
}

TEST_CASE("spin packing") {
  const std::vector<int> s{1, -1, -1, 1, -1};
  const Config x = pack_spins(s);
  CHECK(x == 0b10110);
  CHECK(unpack_spins(x, 5) == s);
  CHECK(overlap(x, 0, 5) == -1);
  CHECK(hamming(x, 0) == 3);
  CHECK(full_mask(64) == ~Config{0});
}

TEST_CASE("deterministic sum is order fixed and accurate") {
  std::vector<double> v;
  for (int i = 0; i < 100000; ++i) v.push_back(1.0 / (i + 1));
  const double a = deterministic_sum(v);
  const double b = deterministic_sum(v);
  CHECK(a == b);
  double ref = 0;
  for (int i = 99999; i >= 0; --i) ref += v[i];
  CHECK(a == doctest::Approx(ref).epsilon(1e-13));
}
