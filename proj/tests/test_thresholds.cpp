#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "pspin/common.hpp"
#include "pspin/mixture.hpp"
#include "pspin/rng.hpp"
#include "pspin/special.hpp"
#include "pspin/thresholds.hpp"

using namespace pspin;

namespace {

const double kLog2 = std::numbers::ln2;

// E tanh^2(aY), Y ~ N(a,1), by Gauss-Kronrod on the real line.
double oracle_F(const MixtureSpec& s, double beta, double q) {
  const double a = beta * std::sqrt(s.xi(q, 1));
  if (a == 0.0) return 0.0;
  auto f = [a](double y) {
    const double t = std::tanh(a * y);
    return t * t * std::exp(-0.5 * (y - a) * (y - a)) / std::sqrt(2 * std::numbers::pi);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a - 40.0, a + 40.0, 15, 1e-13);
}

bool oracle_has_root(const MixtureSpec& s, double beta, double step) {
  for (double q = step; q <= 1.0 + 1e-12; q += step) {
    if (oracle_F(s, beta, q) - q >= 0.0) return true;
  }
  return false;
}

double grid_min(const std::function<double(double)>& f, double step, double* arg = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (double q = step; q < 1.0 - step / 2; q += step) {
    const double v = f(q);
    if (v < best) {
      best = v;
      if (arg) *arg = q;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("fixed point map trivial points") {
  const auto s = MixtureSpec::pure(3);
  CHECK(replica_fixed_point_map(s, 0.0, 0.5) == 0.0);
  CHECK(replica_fixed_point_map(s, 2.0, 0.0) == 0.0);
  const double v = replica_fixed_point_map(s, 2.0, 0.9);
  CHECK(v > 0.0);
  CHECK(v < 1.0);
  CHECK(std::abs(v - replica_fixed_point_map_direct(s, 2.0, 0.9)) < 1e-8);
  CHECK(std::abs(v - oracle_F(s, 2.0, 0.9)) < 1e-10);
}

TEST_CASE("tilted and direct forms agree at random points") {
  const auto s = MixtureSpec::parse("2:0.4,3:1,4:0.6");
  CounterRng rng(2024, 1);
  for (int i = 0; i < 20; ++i) {
    const double beta = 1.5 * rng.uniform();
    const double q = rng.uniform();
    CHECK(std::abs(replica_fixed_point_map(s, beta, q) - replica_fixed_point_map_direct(s, beta, q)) < 1e-8);
  }
}

TEST_CASE("fixed point map is bounded and nondecreasing in beta") {
  const auto s = MixtureSpec::pure(3);
  for (double q = 0.1; q <= 1.0; q += 0.1) {
    double prev = 0.0;
    for (double beta = 0.0; beta <= 3.0; beta += 0.1) {
      const double v = replica_fixed_point_map(s, beta, q);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK(v >= prev - 1e-14);
      prev = v;
    }
  }
}

TEST_CASE("beta_d for p=3 against a grid oracle") {
  const auto s = MixtureSpec::pure(3);
  const auto rep = beta_d(s);
  CHECK(rep.value > 0.0);
  CHECK(rep.value < std::sqrt(2 * kLog2));
  REQUIRE(rep.minimizer.has_value());
  CHECK(*rep.minimizer > 0.0);
  CHECK_FALSE(oracle_has_root(s, rep.value - 1e-3, 1e-3));
  CHECK(oracle_has_root(s, rep.value + 1e-3, 1e-3));
  CHECK_FALSE(has_nontrivial_fixed_point(s, rep.value - 1e-5, 1e-4));
}

TEST_CASE("beta_d approaches the large-p asymptote from above") {
  double prev = std::numeric_limits<double>::infinity();
  for (int p : {20, 50, 100, 200}) {
    const double ratio = beta_d(MixtureSpec::pure(p)).value * std::sqrt(p / (2 * std::log(p)));
    CHECK(ratio > 1.0);
    CHECK(ratio < prev);
    prev = ratio;
  }
}

TEST_CASE("bar_beta_d for p=3 against a fine grid") {
  const auto s = MixtureSpec::pure(3);
  const auto rep = bar_beta_d(s);
  double arg = 0.0;
  const double ref = grid_min([&](double q) { return bar_beta_d_objective(s, 1.0 - q); }, 1e-6, &arg);
  CHECK(std::abs(rep.value - ref) < 1e-5);
  CHECK(rep.value <= ref + 1e-12);
  REQUIRE(rep.minimizer.has_value());
  CHECK(std::abs(*rep.minimizer - arg) < 1e-3);
  const double boundary = 2 * std::sqrt(s.xi(1.0, 1)) * normal_pdf(0.0) / s.xi(1.0);
  CHECK(rep.value <= boundary);
  CHECK(bar_beta_d_objective(s, 1.0 - 1e-12) == doctest::Approx(boundary).epsilon(1e-9));
}

TEST_CASE("bar_beta_d large p upper bound") {
  for (int p : {50, 100, 200}) {
    const double lam = 1.0;
    const double bound = 1.1 * v_ratio(lam) * std::sqrt(2 * std::log(p / lam) / p);
    CHECK(bar_beta_d(MixtureSpec::pure(p)).value <= bound);
  }
}

TEST_CASE("spherical bar_beta_d") {
  const auto s3 = MixtureSpec::pure(3);
  const auto rep = bar_beta_d_spherical(s3);
  const double ref = grid_min([&](double q) { return bar_beta_d_spherical_objective(s3, 1.0 - q); }, 1e-6);
  CHECK(std::abs(rep.value - ref) < 1e-5);

  const int p = 1000000;
  const auto big = MixtureSpec::pure(p);
  const auto rb = bar_beta_d_spherical(big);
  CHECK(std::abs(rb.value - 2.2160) < 1e-2);
  REQUIRE(rb.minimizer.has_value());
  CHECK(std::abs(p * (1.0 - *rb.minimizer) - 1.2608) < 1e-2);
}

TEST_CASE("large p constants") {
  const auto c = large_p_constants();
  CHECK(std::abs(c.limit_value - 2.2160) < 1e-3);
  // argmin and C from the definitions: 1.256431..., 2.343276...
  CHECK(std::abs(c.lambda_star - 1.256431) < 1e-5);
  CHECK(std::abs(c.C - 2.343276) < 1e-5);
  CHECK(std::abs(c.lambda2 - 0.71) < 1e-2);
  CHECK(std::abs(c.lambda1 - 2.13) < 1e-2);
  CHECK(c.lambda1 / c.lambda2 == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(spherical_large_p_profile(c.lambda1) == doctest::Approx(c.C).epsilon(1e-6));
  CHECK(spherical_large_p_profile(c.lambda2) == doctest::Approx(c.C).epsilon(1e-6));
  const auto m = boost::math::tools::brent_find_minima(spherical_large_p_profile, 0.1, 5.0, 40);
  CHECK(c.limit_value == doctest::Approx(m.second).epsilon(1e-9));
  CHECK(c.lambda_star == doctest::Approx(m.first).epsilon(1e-6));
  // C independently: smallest level whose sublevel interval has ratio 3
  auto ratio_gap = [&](double v) {
    auto cross = [v](double a, double b) {
      return boost::math::tools::bisect([v](double l) { return spherical_large_p_profile(l) - v; }, a, b,
                                        boost::math::tools::eps_tolerance<double>(50));
    };
    const auto lo = cross(1e-6, m.first), hi = cross(m.first, 50.0);
    const double l2 = 0.5 * (lo.first + lo.second), l1 = 0.5 * (hi.first + hi.second);
    return l1 / l2 - 3.0;
  };
  const auto cb = boost::math::tools::bisect(ratio_gap, m.second + 1e-6, 4.0,
                                             boost::math::tools::eps_tolerance<double>(45));
  CHECK(c.C == doctest::Approx(0.5 * (cb.first + cb.second)).epsilon(1e-9));
}

TEST_CASE("spherical beta_d closed form") {
  CHECK(beta_d_spherical(3) == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-12));
  CHECK(std::abs(beta_d_spherical(1000) / std::exp(0.5) - 1.0) < 2e-3);
  CHECK_THROWS_AS(beta_d_spherical(2), ValidationError);
}

TEST_CASE("critical temperature bounds") {
  const double top = std::sqrt(2 * kLog2);
  const auto b = beta_c_bounds(3);
  CHECK(b.lo == doctest::Approx(0.875 * top).epsilon(1e-15));
  CHECK(b.hi == doctest::Approx(top).epsilon(1e-15));
  CHECK(beta_c_bounds(60).width() < 1e-15);
  CHECK(check_beta_below_critical(3, 1.2) == BetaCheck::above);
  CHECK(check_beta_below_critical(3, 1.1) == BetaCheck::uncertain);
  CHECK(check_beta_below_critical(3, 0.9) == BetaCheck::below);
}

TEST_CASE("algorithmic threshold closed form") {
  for (int p = 3; p <= 10; ++p) {
    CHECK(std::abs(e_alg(MixtureSpec::pure(p)) - 2 * std::sqrt((p - 1.0) / p)) < 1e-9);
  }
  CHECK(e_alg(MixtureSpec::pure(3)) == doctest::Approx(1.632993).epsilon(1e-6));
  CHECK(e_alg(MixtureSpec::pure(4)) == doctest::Approx(1.732051).epsilon(1e-6));
  CHECK(e_alg(MixtureSpec::pure(2)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("dual of the slice maximum") {
  const auto d0 = u_dual(0.0);
  CHECK(d0.h_star == 0.0);
  CHECK(d0.min_value == doctest::Approx(std::sqrt(2 / std::numbers::pi)).epsilon(1e-14));
  const auto d5 = u_dual(0.5);
  CHECK(d5.h_star == doctest::Approx(0.674490).epsilon(1e-6));
  // 2 phi(0.674490) = 0.635553; the figure 0.635942 does not evaluate to this
  CHECK(d5.min_value == doctest::Approx(0.635553).epsilon(1e-6));
  for (int i = 0; i <= 9; ++i) {
    const double q = i / 10.0;
    const auto m = boost::math::tools::brent_find_minima([q](double h) { return u_dual_objective(h, q); },
                                                         -5.0, 10.0, 52);
    CHECK(std::abs(u_dual(q).min_value - m.second) < 1e-8);
  }
  CHECK(u_dual(1.0 - 1e-12).min_value < 1e-10);
  CHECK_THROWS_AS(u_dual(1.0), ValidationError);
}

TEST_CASE("pure p band") {
  const double eps_prime = 0.5;
  const int p = 100;
  const auto band = ogp_band_pure_p(p, eps_prime);
  REQUIRE(band.feasible);
  CHECK(band.delta > 0.0);
  CHECK(v_ratio(band.delta) * std::sqrt(1 + band.delta) < 1 + eps_prime);
  CHECK(band.q_low == doctest::Approx(1 - band.delta / p).epsilon(1e-15));
  CHECK(band.q_high == doctest::Approx(1 - std::pow(p, -(1 + band.delta))).epsilon(1e-13));
  CHECK(band.r == doctest::Approx((1 - band.q_high) / 2).epsilon(1e-15));
  CHECK(band.R == doctest::Approx((1 - band.q_low) / 2).epsilon(1e-15));
  CHECK(band.full_separation());
  CHECK(band.eps > 0.0);
  const double beta = (1 + eps_prime) * std::sqrt(2 * std::log(p) / p);
  const auto s = MixtureSpec::pure(p);
  for (double q : {band.q_low, band.q_high}) {
    const double lhs = 2 * std::sqrt(s.xi(1.0, 1)) * normal_pdf(normal_upper_half_quantile(1 - q));
    const double rhs = (1 - band.eps) * beta * s.xi(1.0) - beta * (s.xi(1.0) - s.xi_gap(1 - q));
    CHECK(lhs < rhs);
  }
  CHECK(ogp_condition_slack(s, beta, band.q_low, band.q_high) > band.eps);
  CHECK(v_ratio(0.0) == 1.0);
  CHECK(v_ratio(1e-9) == doctest::Approx(1.0).epsilon(1e-8));
}
