#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pspin/landscape.hpp"
#include "pspin/thresholds.hpp"

namespace pspin {

/// Monte Carlo mean with the standard error of the replica mean.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
};

/// Mean and standard error (sample variance, n - 1) of per-replica values.
McEstimate summarize(const std::vector<double>& values);

/// 2 sqrt(xi'(1)) N phi(Phi^{-1}((1 + q)/2)).
double sf_bound(const MixtureSpec& spec, int n, double q);

/// max over the overlap-q slice around all-ones of H(sigma'; G), in H units.
/// q is moved to the nearest point of the parity grid.
double sf_slice_value(const DisorderTensor& G, double q);

/// E max_{<1, sigma'> = Nq} H(sigma'), over i.i.d. disorder.
McEstimate sf_empirical(const MixtureSpec& spec, int n, double q, std::size_t replicas,
                        std::uint64_t seed);

/// True if some sigma' with H(sigma') >= threshold sits at a Hamming
/// distance in `range` from sigma. Stops at the first witness.
bool has_window_witness(const MultilinearHamiltonian& H, Config sigma, DistanceRange range,
                        double threshold);
bool has_window_witness(const EnergyTable& table, Config sigma, DistanceRange range,
                        double threshold);

enum class OgpMode { null_model, planted_model };
const char* to_string(OgpMode mode);

struct SoftOgpEstimate {
  double tau = 0.0;
  OgpBand band;
  double beta = 0.0;
  double beta_prime = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
  OgpMode mode = OgpMode::null_model;
  bool empty_window = false;  // no parity-grid overlap inside [q_low, q_high]
};

/// P(exists sigma' in S_{beta'}(G_tau) with overlap in [q_low, q_high]) for
/// sigma ~ mu_{beta,G} (null) or (G, sigma) ~ planted law (planted). Null mode
/// averages `inner_samples` Gibbs samples per disorder pair; planted mode
/// tests the planted configuration once per pair. beta_prime may be -inf.
SoftOgpEstimate soft_ogp_estimate(OgpMode mode, int n, const MixtureSpec& spec, double beta,
                                  double beta_prime, const OgpBand& band, double tau,
                                  std::size_t outer_replicas, std::size_t inner_samples,
                                  std::uint64_t seed);

/// Per replica: the largest overlap of all-ones with S_beta(G'), or -inf
/// when the super-level set is empty.
std::vector<double> tau1_max_overlaps(int n, const MixtureSpec& spec, double beta,
                                      std::size_t replicas, std::uint64_t seed);

/// P(exists sigma' in S_beta(G') with <1, sigma'>/N >= q_low).
McEstimate tau1_probability(int n, const MixtureSpec& spec, double beta, double q_low,
                            std::size_t replicas, std::uint64_t seed);

/// P(exists sigma' in S_{beta'}(G') with overlap in the open window
/// (q_low, q_high)) for fixed sigma = all-ones.
McEstimate open_window_probability(int n, const MixtureSpec& spec, double beta_prime,
                                   const OgpBand& band, std::size_t replicas, std::uint64_t seed);

struct Membership {
  bool in_domain = false;  // sigma in S_{beta'}(G)
  bool member = false;
  bool indeterminate = false;  // estimate within 2 SE of the threshold
  double conditional_prob = 0.0;
  double std_error = 0.0;
  double threshold = 1.0;  // e^{-cN/2}
  std::size_t inner_replicas = 0;
};

/// Membership threshold e^{-cN/2}.
double membership_threshold(int n, double c);

/// Classifies an estimated conditional probability against e^{-cN/2}.
Membership classify_membership(double conditional_prob, std::size_t inner, int n, double c);

/// Estimates P(exists sigma' in S_{beta'}(G_tau), overlap in (q_low, q_high) | G)
/// over `inner` fresh copies G'_i = sample_null(seed, i). The copies depend
/// only on (seed, i), not on tau.
Membership exceptional_membership(Config sigma, const DisorderTensor& G, double beta_prime,
                                  const OgpBand& band, double tau, double c, std::size_t inner,
                                  std::uint64_t seed);

/// Conditional probabilities at several tau values sharing the inner copies.
std::vector<McEstimate> conditional_witness_probabilities(Config sigma, const DisorderTensor& G,
                                                          double beta_prime, const OgpBand& band,
                                                          const std::vector<double>& taus,
                                                          std::size_t inner, std::uint64_t seed);

/// tau_k = k/K, k = 0..K-1.
std::vector<double> tau_grid(int K);

struct ExceptionalMass {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::size_t indeterminate = 0;  // samples with some grid point inside the 2 SE zone
  std::vector<int> indicators;    // per (G, sigma) sample
};

/// E mu_{beta,G}(E(G)) with E(G) = union over tau_k of E_{tau_k}(G): one
/// exact Gibbs sample per disorder. Inner copies depend on the replica only,
/// so indicators are nested in K (for nested grids) and in c.
ExceptionalMass exceptional_mass(int n, const MixtureSpec& spec, double beta, double beta_prime,
                                 const OgpBand& band, int K, double c, std::size_t replicas,
                                 std::size_t inner, std::uint64_t seed);

}  // namespace pspin
