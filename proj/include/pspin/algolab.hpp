#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pspin/disorder.hpp"
#include "pspin/ogp.hpp"
#include "pspin/thresholds.hpp"

namespace pspin {

/// Deterministic map from a disorder tensor to a point of [-1, 1]^N.
class SearchAlgorithm {
 public:
  virtual ~SearchAlgorithm() = default;

  virtual std::string name() const = 0;
  virtual std::vector<double> run(const DisorderTensor& G) const = 0;
  /// Claimed Lipschitz constant, if any.
  virtual std::optional<double> lipschitz() const = 0;
  /// B with sup ||output||^2 <= B N.
  virtual double norm_bound() const { return 1.0; }
};

/// Ignores the input and returns sigma0 (bit set = -1). L = 0, B = 1.
std::unique_ptr<SearchAlgorithm> baseline_constant(Config sigma0 = 0);

/// output_i = clamp(scale g_{i,...,i}, -1, 1) on the top-degree couplings.
/// Claimed L = scale.
std::unique_ptr<SearchAlgorithm> baseline_diagonal(double scale);

/// Start at all-ones, sweep sites 0..N-1 flipping whenever the flip strictly
/// raises H; stop after a sweep without flips or after max_sweeps.
std::unique_ptr<SearchAlgorithm> baseline_greedy(int max_sweeps);

/// Negative control: +-all-ones by the sign of a hash of the coupling bits.
/// Claims L = 1, which is false.
std::unique_ptr<SearchAlgorithm> unstable_hash_control();

/// Builds an algorithm from "constant", "diagonal:SCALE", "greedy:SWEEPS" or
/// "hash".
std::unique_ptr<SearchAlgorithm> make_algorithm(const std::string& text);

struct GreedyResult {
  Config x = 0;
  int sweeps = 0;
  bool converged = false;
};
GreedyResult greedy_ascent(const MultilinearHamiltonian& H, int max_sweeps);

/// Coordinatewise sign, ties to +1, packed (bit set = -1).
Config round_to_hypercube(const std::vector<double>& x);

/// H at a real point of the cube by tensor contraction.
double energy_real(const DisorderTensor& G, const std::vector<double>& x);

struct ChiCurve {
  std::string algorithm;
  int n = 0;
  MixtureSpec spec = MixtureSpec::pure(2);
  std::vector<double> tau;
  std::vector<double> chi;
  std::vector<double> std_error;
  std::size_t replicas = 0;
  // values[r][t] = <A(G_r), A(G_r,tau_t)>/N
  std::vector<std::vector<double>> values;
};

/// chi_N(tau) = E <A(G), A(G_tau)>/N with common (G, G') pairs across tau.
ChiCurve chi_estimate(const SearchAlgorithm& alg, int n, const MixtureSpec& spec,
                      const std::vector<double>& tau_grid, std::size_t replicas, std::uint64_t seed);

/// chi(tau_t)/chi(tau_0) with a delta-method standard error.
McEstimate chi_ratio(const ChiCurve& curve, std::size_t t);

struct ConcentrationRow {
  double t = 0.0;
  double exceedance = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  // 2 exp(-N t^2 / (8 L^2))
  bool pass = true;
};

struct ConcentrationCheck {
  std::string algorithm;
  double tau = 0.0;
  double chi = 0.0;
  bool applicable = true;  // false when the algorithm claims no L
  double lipschitz = 0.0;  // claimed, or the empirical scale when not applicable
  std::vector<ConcentrationRow> rows;
  bool violated = false;
};

ConcentrationCheck chi_concentration_check(const SearchAlgorithm& alg, int n, const MixtureSpec& spec,
                                           double tau, std::size_t replicas,
                                           const std::vector<double>& t_grid, std::uint64_t seed);

struct GridSelection {
  int K = 0;
  int k = 0;
  double tau_k = 0.0;
  double chi_at_k = 0.0;
  bool witness = false;
  bool precondition_ok = true;
  std::string precondition_failure;
};

/// K = ceil(10 L^2 / (q_high - q_low)); smallest k in [1, K-1] with the
/// interpolated chi(k/K) inside (q_low + delta, q_high - delta).
GridSelection grid_tau_select(const ChiCurve& chi, const OgpBand& band, double delta, double L);

/// ceil(10 L^2 / width), robust to width carrying rounding error.
int grid_size(double L, double width);

struct SplitCheck {
  std::string term;
  double first = 0.0;
  double second = 0.0;
  double combined_se = 0.0;
  bool consistent = true;
};

struct RarityReport {
  std::string algorithm;
  int n = 0;
  double beta = 0.0;
  double beta_prime = 0.0;
  int K = 0;
  double c = 0.0;
  std::size_t replicas = 0;
  std::size_t inner = 0;
  std::string rounding = "sign, ties to +1";
  McEstimate not_in_s_beta;
  McEstimate not_in_s_beta_prime;
  McEstimate in_exceptional;
  McEstimate gibbs_exceptional;
  McEstimate failure_lhs;  // P(A in E) + 4 P(A not in S_beta')
  double mean_energy_raw = 0.0;      // H(A(G))/N before rounding
  double mean_energy_rounded = 0.0;  // after rounding
  std::vector<SplitCheck> split;
  bool split_consistent = true;
};

RarityReport rarity_report(const SearchAlgorithm& alg, int n, const MixtureSpec& spec, double beta,
                           double beta_prime, const OgpBand& band, int K, double c,
                           std::size_t replicas, std::size_t inner, std::uint64_t seed);

}  // namespace pspin
