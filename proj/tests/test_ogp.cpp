#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "pspin/common.hpp"
#include "pspin/disorder.hpp"
#include "pspin/landscape.hpp"
#include "pspin/ogp.hpp"
#include "pspin/rng.hpp"
#include "pspin/thresholds.hpp"

using namespace pspin;

namespace {

const auto kP3 = MixtureSpec::pure(3);
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double combined(double a, double b) { return std::hypot(a, b); }

}  // namespace

TEST_CASE("replica summary") {
  const auto e = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(e.mean == 2.5);
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.replicas == 4);
  CHECK(summarize({1.0, 1.0, 1.0}).std_error == 0.0);
}

TEST_CASE("slice bound closed form") {
  const auto s = MixtureSpec::parse("2:0.5,3:1");
  const int n = 16;
  CHECK(sf_bound(s, n, 0.0) == doctest::Approx(n * std::sqrt(2 * s.xi(1.0, 1) / std::numbers::pi)).epsilon(1e-14));
  CHECK(sf_bound(s, n, 1.0 - 1e-13) < 1e-10);
  for (int i = 0; i < 10; ++i) {
    const double q = i / 10.0;
    CHECK(std::abs(sf_bound(s, n, q) - n * std::sqrt(s.xi(1.0, 1)) * u_dual(q).min_value) <= 1e-12 * n);
  }
}

TEST_CASE("slice values") {
  CHECK(sf_slice_value(DisorderTensor::zeros(12, kP3), 0.5) == 0.0);
  const auto G = sample_null(12, kP3, 4);
  CHECK(sf_slice_value(G, 1.0) == doctest::Approx(energy(G, Config{0})).epsilon(1e-12));
}

TEST_CASE("slice maximum respects the comparison bound") {
  const int n = 16;
  for (double q : {0.25, 0.5, 0.75}) {
    const auto e = sf_empirical(kP3, n, q, 100, 17);
    CHECK(e.replicas == 100);
    CHECK(e.mean <= sf_bound(kP3, n, q) + 3 * e.std_error);
    MESSAGE("q=" << q << " mean=" << e.mean << " se=" << e.std_error << " bound=" << sf_bound(kP3, n, q));
  }
  const auto top = sf_empirical(kP3, n, 1.0, 100, 18);
  CHECK(std::abs(top.mean) <= 3 * top.std_error);
}

TEST_CASE("window witnesses agree between table and hamiltonian") {
  const auto G = sample_null(12, kP3, 6);
  const auto t = enumerate(G);
  const MultilinearHamiltonian H(G);
  CounterRng rng(6, 6);
  for (int i = 0; i < 40; ++i) {
    const Config x = rng.below(t.size());
    const DistanceRange range{static_cast<int>(rng.below(6)), static_cast<int>(3 + rng.below(8))};
    const double level = 0.3 * 12;
    bool direct = false;
    for (Config y = 0; y < t.size(); ++y) direct = direct || (range.contains(hamming(x, y)) && t[y] >= level);
    CHECK(has_window_witness(t, x, range, level) == direct);
    CHECK(has_window_witness(H, x, range, level) == direct);
  }
}

TEST_CASE("soft overlap gap estimate: degenerate cases") {
  const int n = 10;
  const auto empty = OgpBand::from_overlaps(0.25, 0.35, 0.1);  // no multiple of 0.2 inside
  for (auto mode : {OgpMode::null_model, OgpMode::planted_model}) {
    const auto e = soft_ogp_estimate(mode, n, kP3, 0.8, 0.5, empty, 0.3, 10, 2, 1);
    CHECK(e.empty_window);
    CHECK(e.estimate == 0.0);
    const auto all = soft_ogp_estimate(mode, n, kP3, 0.8, kNegInf, OgpBand::from_overlaps(0.2, 0.6, 0.1), 0.3,
                                       10, 2, 1);
    CHECK(all.estimate == 1.0);
    CHECK(all.std_error == 0.0);
  }
}

TEST_CASE("soft overlap gap estimate: null and planted routes agree") {
  const int n = 16;
  const auto band = OgpBand::from_overlaps(0.625, 0.875, 0.1);
  const auto a = soft_ogp_estimate(OgpMode::null_model, n, kP3, 0.9, 0.8, band, 0.5, 200, 1, 11);
  const auto b = soft_ogp_estimate(OgpMode::planted_model, n, kP3, 0.9, 0.8, band, 0.5, 200, 1, 12);
  MESSAGE("null " << a.estimate << " +- " << a.std_error << ", planted " << b.estimate << " +- " << b.std_error);
  for (const auto& e : {a, b}) {
    CHECK(e.estimate > 0.1);
    CHECK(e.estimate < 0.9);
    CHECK(e.std_error >= 0.0);
  }
  CHECK(std::abs(a.estimate - b.estimate) <= 3 * combined(a.std_error, b.std_error));

  const auto b0 = soft_ogp_estimate(OgpMode::planted_model, n, kP3, 0.9, 0.8, band, 0.0, 200, 1, 13);
  CHECK(b0.estimate >= b.estimate - 3 * combined(b0.std_error, b.std_error));
}

TEST_CASE("fully decorrelated probe") {
  const int n = 12;
  CHECK(tau1_probability(n, kP3, 0.3, -1.0, 30, 2).mean == 1.0);
  CHECK(tau1_probability(n, kP3, 5.0, -1.0, 30, 2).mean == 0.0);
  const auto overlaps = tau1_max_overlaps(n, kP3, 5.0, 5, 2);
  for (double q : overlaps) CHECK(q == kNegInf);
  double prev = 1.0;
  for (int k = -6; k <= 6; ++k) {
    const double q = k / 6.0;
    const double p = tau1_probability(n, kP3, 0.7, q, 60, 3).mean;
    CHECK(p <= prev);
    prev = p;
  }
}

TEST_CASE("membership threshold") {
  CHECK(membership_threshold(20, 0.0) == 1.0);
  CHECK(membership_threshold(20, 0.1) == doctest::Approx(std::exp(-1.0)));
  const auto all = classify_membership(1.0, 50, 20, 0.0);
  CHECK(all.member);
  CHECK_FALSE(all.indeterminate);
  CHECK_FALSE(classify_membership(49.0 / 50, 50, 20, 0.0).member);
  const auto close = classify_membership(0.38, 100, 20, 0.1);
  CHECK(close.indeterminate);
  const auto clear = classify_membership(0.9, 100, 20, 0.1);
  CHECK(clear.member);
  CHECK_FALSE(clear.indeterminate);
}

TEST_CASE("membership at the decorrelated end does not see the disorder") {
  const int n = 12;
  const double bp = 0.7;
  const auto band = OgpBand::from_overlaps(0.3, 0.8, 0.1);
  const std::size_t inner = 60;
  // same inner copies: identical conditional probabilities for any G
  const auto G1 = sample_null(n, kP3, 1), G2 = sample_null(n, kP3, 2);
  const Config x = 0x5a5;
  const auto p1 = conditional_witness_probabilities(x, G1, bp, band, {1.0}, inner, 99);
  const auto p2 = conditional_witness_probabilities(x, G2, bp, band, {1.0}, inner, 99);
  CHECK(p1[0].mean == p2[0].mean);

  const auto ref = open_window_probability(n, kP3, bp, band, 400, 1234);
  double pooled = 0;
  int in_domain = 0;
  for (std::uint64_t pair = 0; pair < 20; ++pair) {
    const auto G = sample_null(n, kP3, 100 + pair);
    const auto t = enumerate(G);
    const Config s = GibbsEnsemble(t, 0.9).sample_one(pair, 0);
    const auto m = exceptional_membership(s, G, kNegInf, band, 1.0, 0.1, inner, 500 + pair);
    CHECK(m.in_domain);
    in_domain += m.in_domain;
    const auto cond = conditional_witness_probabilities(s, G, bp, band, {1.0}, inner, 500 + pair);
    pooled += cond[0].mean;
  }
  pooled /= 20;
  const double se_pooled = std::sqrt(ref.mean * (1 - ref.mean) / (20.0 * inner));
  MESSAGE("pooled " << pooled << " vs fixed-point probe " << ref.mean);
  CHECK(std::abs(pooled - ref.mean) <= 3 * combined(se_pooled, ref.std_error) + 1e-12);
  CHECK(in_domain == 20);
}

TEST_CASE("membership outside the domain and with an empty window") {
  const int n = 10;
  const auto G = sample_null(n, kP3, 3);
  const auto t = enumerate(G);
  const Config low = [&] {
    Config best = 0;
    for (Config x = 0; x < t.size(); ++x) if (t[x] < t[best]) best = x;
    return best;
  }();
  const auto out = exceptional_membership(low, G, 0.5, OgpBand::from_overlaps(0.2, 0.8, 0.1), 0.5, 0.1, 10, 1);
  CHECK_FALSE(out.in_domain);
  CHECK_FALSE(out.member);
  const auto empty = OgpBand::from_overlaps(0.4, 0.6, 0.1);  // open window holds no point of the 0.2 grid
  for (double tau : {0.0, 0.5, 1.0}) {
    const auto m = exceptional_membership(t.argmax(), G, kNegInf, empty, tau, 0.0, 10, 2);
    CHECK_FALSE(m.member);
    CHECK(m.conditional_prob == 0.0);
  }
}

TEST_CASE("tau grid") {
  CHECK(tau_grid(1) == std::vector<double>{0.0});
  CHECK(tau_grid(4) == std::vector<double>{0.0, 0.25, 0.5, 0.75});
  CHECK_THROWS_AS(tau_grid(0), ValidationError);
}

TEST_CASE("exceptional mass: reduction and monotonicity") {
  const int n = 12;
  const auto band = OgpBand::from_overlaps(0.5, 0.85, 0.1);
  const double beta = 0.9, bp = 0.8;
  const std::size_t reps = 40, inner = 40;
  const std::uint64_t seed = 5;

  // K = 1 is the single point tau = 0, where G_tau = G: every inner copy
  // agrees, so membership at c = 0 is a deterministic witness check.
  const auto k1 = exceptional_mass(n, kP3, beta, bp, band, 1, 0.0, reps, inner, seed);
  CHECK(k1.indeterminate == 0);

  std::vector<std::vector<int>> by_k;
  for (int K : {1, 2, 4}) by_k.push_back(exceptional_mass(n, kP3, beta, bp, band, K, 0.2, reps, inner, seed).indicators);
  for (std::size_t r = 0; r < reps; ++r) {
    CHECK(by_k[0][r] <= by_k[1][r]);
    CHECK(by_k[1][r] <= by_k[2][r]);
  }

  std::vector<std::vector<int>> by_c;
  for (double c : {0.0, 0.2, 0.5, 1.0}) by_c.push_back(exceptional_mass(n, kP3, beta, bp, band, 4, c, reps, inner, seed).indicators);
  for (std::size_t i = 1; i < by_c.size(); ++i) {
    for (std::size_t r = 0; r < reps; ++r) CHECK(by_c[i - 1][r] <= by_c[i][r]);
  }
  int sum0 = 0, sum3 = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    sum0 += by_c[0][r];
    sum3 += by_c[3][r];
  }
  MESSAGE("members at c=0: " << sum0 << ", at c=1: " << sum3 << " of " << reps);
}
