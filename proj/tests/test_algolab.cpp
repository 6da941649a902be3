#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "pspin/algolab.hpp"
#include "pspin/common.hpp"
#include "pspin/disorder.hpp"
#include "pspin/landscape.hpp"
#include "pspin/ogp.hpp"
#include "pspin/rng.hpp"

using namespace pspin;

namespace {

const auto kP2 = MixtureSpec::pure(2);
const auto kP3 = MixtureSpec::pure(3);

ChiCurve synthetic_curve(const std::vector<double>& tau, double (*f)(double)) {
  ChiCurve c;
  c.tau = tau;
  for (double t : tau) {
    c.chi.push_back(f(t));
    c.std_error.push_back(0.0);
  }
  c.replicas = 1;
  return c;
}

std::vector<double> uniform_grid(int m) {
  std::vector<double> g;
  for (int i = 0; i <= m; ++i) g.push_back(static_cast<double>(i) / m);
  return g;
}

}  // namespace

TEST_CASE("algorithms are deterministic") {
  const auto G = sample_null(12, kP3, 3);
  for (const char* name : {"constant", "diagonal:0.5", "greedy:50", "hash"}) {
    const auto alg = make_algorithm(name);
    const auto a = alg->run(G), b = alg->run(G);
    CHECK(a == b);
    double sq = 0;
    for (double v : a) {
      CHECK(std::abs(v) <= 1.0);
      sq += v * v;
    }
    CHECK(sq <= alg->norm_bound() * 12 + 1e-12);
  }
  CHECK_THROWS_AS(make_algorithm("annealing"), ValidationError);
  CHECK_THROWS_AS(make_algorithm("greedy:0"), ValidationError);
  CHECK_THROWS_AS(make_algorithm("diagonal:x"), ValidationError);
}

TEST_CASE("constant baseline") {
  const auto alg = baseline_constant(0b1011);
  CHECK(alg->lipschitz() == 0.0);
  const auto out = alg->run(sample_null(6, kP3, 1));
  CHECK(round_to_hypercube(out) == 0b1011);
  const auto chi = chi_estimate(*alg, 10, kP3, {0.0, 0.3, 0.7, 1.0}, 20, 1);
  for (std::size_t t = 0; t < chi.tau.size(); ++t) {
    CHECK(chi.chi[t] == 1.0);
    CHECK(chi.std_error[t] == 0.0);
  }
  const auto conc = chi_concentration_check(*alg, 10, kP3, 0.5, 50, {0.05, 0.1, 0.2}, 2);
  CHECK(conc.applicable);
  for (const auto& row : conc.rows) {
    CHECK(row.exceedance == 0.0);
    CHECK(row.pass);
  }
  CHECK_FALSE(conc.violated);

  int misses = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto G = sample_null(12, kP3, seed);
    misses += energy(G, Config{0}) < 0.9 * 12;
  }
  MESSAGE("constant output outside the super-level set at beta=0.9: " << misses << " of 20");
}

TEST_CASE("diagonal baseline follows the interpolation law") {
  const int n = 400;
  const double scale = 0.1;  // |g| > 10 is far beyond 1e-6 probability
  const auto alg = baseline_diagonal(scale);
  CHECK(alg->lipschitz() == scale);
  const auto chi = chi_estimate(*alg, n, kP2, {0.0, 0.25, 0.5, 0.75, 1.0}, 40, 9);
  for (std::size_t t = 1; t < 4; ++t) {
    const auto ratio = chi_ratio(chi, t);
    CHECK(std::abs(ratio.mean - (1.0 - chi.tau[t])) <= 3 * ratio.std_error);
  }
  CHECK(std::abs(chi.chi[4]) <= 3 * chi.std_error[4]);
  const auto conc = chi_concentration_check(*alg, n, kP2, 0.5, 40, {0.05, 0.1, 0.2}, 10);
  CHECK(conc.applicable);
  CHECK_FALSE(conc.violated);
  for (const auto& row : conc.rows) CHECK(row.exceedance <= row.bound + 3 * row.std_error);
}

TEST_CASE("diagonal output reads the top-degree diagonal") {
  const auto G = sample_null(5, kP3, 2);
  const auto out = baseline_diagonal(0.3)->run(G);
  const auto c = G.couplings(0);
  for (int i = 0; i < 5; ++i) {
    const double g = c[static_cast<std::size_t>(i * 25 + i * 5 + i)];
    CHECK(out[static_cast<std::size_t>(i)] == std::clamp(0.3 * g, -1.0, 1.0));
  }
}

TEST_CASE("unstable control is caught") {
  const auto alg = unstable_hash_control();
  const auto conc = chi_concentration_check(*alg, 400, kP2, 0.5, 40, {0.2}, 4);
  CHECK(conc.applicable);
  CHECK(conc.violated);
  REQUIRE(conc.rows.size() == 1);
  CHECK(conc.rows[0].exceedance > conc.rows[0].bound + 3 * conc.rows[0].std_error);
}

TEST_CASE("greedy ascent") {
  const auto flat = baseline_greedy(10)->run(DisorderTensor::zeros(8, kP3));
  CHECK(round_to_hypercube(flat) == 0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto G = sample_null(14, kP3, seed);
    const MultilinearHamiltonian H(G);
    const auto res = greedy_ascent(H, 1000);
    REQUIRE(res.converged);
    for (int i = 0; i < 14; ++i) CHECK(H.flip_delta(res.x, i) <= 0.0);
    CHECK(round_to_hypercube(baseline_greedy(1000)->run(G)) == res.x);
  }
  CHECK_FALSE(baseline_greedy(1)->lipschitz().has_value());

  double mean = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto G = sample_null(20, kP3, 200 + seed);
    mean += MultilinearHamiltonian(G).energy(greedy_ascent(MultilinearHamiltonian(G), 1000).x) / 20;
  }
  MESSAGE("greedy mean H/N at N=20, p=3: " << mean / 50);
}

TEST_CASE("greedy correlation decreases along the interpolation") {
  const auto alg = baseline_greedy(1000);
  const auto chi = chi_estimate(*alg, 16, kP3, {0.0, 0.1, 0.25, 0.5, 0.75, 1.0}, 150, 21);
  CHECK(chi.chi[0] == 1.0);
  for (std::size_t t = 1; t < chi.tau.size(); ++t) {
    // common (G, G') pairs: compare paired differences
    std::vector<double> diff;
    for (const auto& row : chi.values) diff.push_back(row[t] - row[t - 1]);
    const auto d = summarize(diff);
    CHECK(d.mean <= 3 * d.std_error + 1e-12);
  }
  CHECK_FALSE(chi_concentration_check(*alg, 16, kP3, 0.5, 50, {0.1}, 3).applicable);
}

TEST_CASE("rounding and real energies") {
  CHECK(round_to_hypercube({0.3, -0.1, 0.0, -1.0}) == 0b1010);
  const auto G = sample_null(6, kP3, 5);
  const std::vector<double> x{1, -1, 1, 1, -1, -1};
  CHECK(energy_real(G, x) == doctest::Approx(energy(G, round_to_hypercube(x))).epsilon(1e-12));
}

TEST_CASE("grid size") {
  CHECK(grid_size(2.0, 0.4) == 100);
  CHECK(grid_size(1.0, 0.3) == 34);
  CHECK(grid_size(0.0, 0.4) == 1);
}

TEST_CASE("grid selection on a synthetic curve") {
  const auto band = OgpBand::from_overlaps(0.3, 0.7, 0.1);
  const auto linear = synthetic_curve(uniform_grid(10), [](double t) { return 0.95 - 0.9 * t; });
  const auto sel = grid_tau_select(linear, band, 0.1, 2.0);
  CHECK(sel.precondition_ok);
  CHECK(sel.K == 100);
  CHECK(sel.k == 39);
  CHECK(sel.tau_k == doctest::Approx(0.39));
  CHECK(sel.witness);
  CHECK(sel.chi_at_k > 0.4);
  CHECK(sel.chi_at_k < 0.6);

  const auto flat = synthetic_curve(uniform_grid(4), [](double) { return 1.0; });
  const auto bad = grid_tau_select(flat, band, 0.1, 2.0);
  CHECK_FALSE(bad.precondition_ok);
  CHECK(bad.precondition_failure.find("tau=1") != std::string::npos);

  // a jump across the window leaves no grid point inside it
  const auto step = synthetic_curve({0.0, 0.5, 0.5000001, 1.0},
                                    [](double t) { return t <= 0.5 ? 0.95 : 0.05; });
  const auto none = grid_tau_select(step, band, 0.1, 0.3);
  CHECK(none.precondition_ok);
  CHECK_FALSE(none.witness);
  CHECK(none.k >= 1);
  CHECK(none.k <= none.K - 1);
  CHECK_THROWS_AS(grid_tau_select(linear, band, 0.25, 2.0), ValidationError);
}

TEST_CASE("rarity: constant output far below the level") {
  const auto band = OgpBand::from_overlaps(0.3, 0.8, 0.1);
  const auto rep = rarity_report(*baseline_constant(), 12, kP3, 1.0, 0.9, band, 2, 0.1, 40, 5, 7);
  CHECK(rep.not_in_s_beta.mean >= 0.9);
  CHECK(rep.failure_lhs.mean == doctest::Approx(rep.in_exceptional.mean + 4 * rep.not_in_s_beta_prime.mean));
  CHECK(rep.mean_energy_raw == doctest::Approx(rep.mean_energy_rounded).epsilon(1e-12));
}

TEST_CASE("rarity: degenerate grid reduces to a witness check") {
  const int n = 12;
  const double bp = 0.3;
  const auto band = OgpBand::from_overlaps(0.2, 0.8, 0.1);
  const auto alg = baseline_constant();
  const auto r1 = rarity_report(*alg, n, kP3, 0.5, bp, band, 1, 0.0, 200, 1, 3);
  const auto r7 = rarity_report(*alg, n, kP3, 0.5, bp, band, 1, 0.0, 200, 7, 3);
  CHECK(r1.in_exceptional.mean == r7.in_exceptional.mean);
  // independent estimate of P(H(1) >= beta' N and a witness in (q_low, q_high))
  const auto range = distance_range(n, band.q_low, band.q_high, false);
  std::vector<double> hits;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto t = enumerate(sample_null(n, kP3, 9000 + seed));
    const bool in = t[0] >= bp * n && has_window_witness(t, 0, range, bp * n);
    hits.push_back(in ? 1.0 : 0.0);
  }
  const auto direct = summarize(hits);
  CHECK(std::abs(direct.mean - r1.in_exceptional.mean) <= 3 * std::hypot(direct.std_error, r1.in_exceptional.std_error));
}

TEST_CASE("rarity: greedy report halves agree") {
  const auto band = OgpBand::from_overlaps(0.5, 0.85, 0.1);
  const auto rep = rarity_report(*baseline_greedy(1000), 14, kP3, 0.9, 0.8, band, 2, 0.1, 50, 10, 31);
  CHECK(rep.split.size() == 5);
  CHECK(rep.split_consistent);
  for (const auto& s : rep.split) MESSAGE(s.term << ": " << s.first << " vs " << s.second << " (se " << s.combined_se << ")");
  CHECK(rep.mean_energy_rounded == doctest::Approx(rep.mean_energy_raw).epsilon(1e-12));
}
