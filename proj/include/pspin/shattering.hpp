#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pspin/landscape.hpp"
#include "pspin/thresholds.hpp"

namespace pspin {

inline constexpr std::size_t kDefaultRegularSetCap = 1'000'000;

struct ShatterParams {
  double beta = 0.0;
  double eps = 0.0;  // half-width eps/2 is used in both conditions
  OgpBand band;

  bool full_separation() const noexcept { return band.full_separation(); }
  void validate() const;
};

/// Regular points together with the two sets whose failure removes a point:
/// the energy band |H/(N beta xi(1)) - 1| <= eps/2, and the shell failures
/// {sigma : some sigma' with H(sigma') >= (1 - eps/2) beta xi(1) N sits at
/// normalized distance in [r, R]}.
struct RegularSet {
  ConfigSet members;
  ConfigSet in_band;
  ConfigSet shell_failure;
};

RegularSet regular_set(const EnergyTable& table, const ShatterParams& params);

/// Direct two-condition check for one configuration (scans the whole table).
bool is_regular_reference(const EnergyTable& table, const ShatterParams& params, Config sigma);

struct ClusterStats {
  std::size_t size = 0;
  double diameter = 0.0;  // normalized Hamming
  double mass = 0.0;      // exact Gibbs mass, 0 when no ensemble was supplied
};

struct ClusterDecomposition {
  int n = 0;
  std::vector<std::vector<Config>> clusters;  // members ascending, clusters by representative
  std::vector<Config> representatives;        // smallest member of each cluster
  std::vector<ClusterStats> stats;
  ConfigSet regular;
  // Pairs in different clusters at normalized distance <= R - r.
  std::size_t dichotomy_violations = 0;
  // Pairs of regular points at normalized distance in [r, R].
  std::size_t shell_pairs = 0;
  double min_separation = 0.0;  // normalized, over pairs in different clusters
  bool has_separation = false;
  // Cluster index pairs (i < j) with some cross pair at distance <= R.
  std::vector<std::pair<std::size_t, std::size_t>> close_cluster_pairs;
};

/// Union-find over the regular points, joining pairs at distance <= 2rN.
/// Throws ResourceError when the regular set exceeds `cap`.
ClusterDecomposition build_clusters(const ConfigSet& regular, const OgpBand& band,
                                    const GibbsEnsemble* mu = nullptr,
                                    std::size_t cap = kDefaultRegularSetCap);

struct ShatterReport {
  int n = 0;
  double beta = 0.0;
  double eps = 0.0;
  double r = 0.0;
  double R = 0.0;
  bool full_separation = false;
  std::size_t num_clusters = 0;
  std::size_t regular_size = 0;

  std::optional<double> max_diameter;  // normalized; empty when there are no clusters
  bool diameter_ok = true;             // max_diameter <= r

  std::optional<double> min_separation;     // full-separation regime
  std::optional<double> close_pair_weight;  // r >= R/3 regime
  bool separation_ok = true;

  double max_mass = 0.0;
  double coverage = 0.0;
  double band_failure_mass = 0.0;
  double shell_failure_mass = 0.0;
  double shell_failure_in_band_mass = 0.0;
  double union_bound_total = 0.0;  // coverage + both failure masses, >= 1

  std::size_t shell_pairs = 0;
  std::size_t dichotomy_violations = 0;
  bool partition_ok = true;

  std::optional<double> log_max_mass_rate;  // log(max_mass)/N

  std::vector<ClusterStats> clusters;
  std::vector<Config> representatives;
};

ShatterReport verify_decomposition(const ClusterDecomposition& dec, const RegularSet& parts,
                                   const GibbsEnsemble& mu, const ShatterParams& params);

/// h(2r) + (1 + eps/2) beta^2 - beta^2/2 - log 2 + t,
/// t = [1 - (1 - eps')^2 (1 + eps)] (log 2)/2.
double entropy_mass_bound(double two_r, double beta, double eps, double eps_prime);

struct ShatterResult {
  RegularSet parts;
  ClusterDecomposition decomposition;
  ShatterReport report;
};

ShatterResult shatter(const EnergyTable& table, const ShatterParams& params,
                      std::size_t cap = kDefaultRegularSetCap);

}  // namespace pspin
