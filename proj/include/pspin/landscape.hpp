#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pspin/common.hpp"
#include "pspin/disorder.hpp"

namespace pspin {

inline constexpr int kDefaultEnumerationCap = 26;

/// Gray-code blocks are re-anchored by a direct evaluation every
/// 2^kEnumerationBlockBits steps. Fixed, so tables do not depend on the
/// worker count.
inline constexpr int kEnumerationBlockBits = 12;

/// Membership bitset over the 2^N configurations.
class ConfigSet {
 public:
  ConfigSet() = default;
  explicit ConfigSet(int n);

  int n() const noexcept { return n_; }
  std::size_t universe() const noexcept { return std::size_t{1} << n_; }

  bool contains(Config x) const noexcept { return (words_[x >> 6] >> (x & 63)) & 1u; }
  void insert(Config x) noexcept { words_[x >> 6] |= std::uint64_t{1} << (x & 63); }
  std::size_t size() const noexcept;
  bool empty() const noexcept { return size() == 0; }

  /// Members in increasing bit-pattern order.
  std::vector<Config> members() const;

  friend bool operator==(const ConfigSet&, const ConfigSet&) = default;

 private:
  int n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Exact energies of all 2^N configurations, indexed by bit pattern.
class EnergyTable {
 public:
  EnergyTable(int n, std::vector<double> energies, MixtureSpec spec, std::uint64_t seed,
              DisorderKind kind);

  int n() const noexcept { return n_; }
  std::span<const double> energies() const noexcept { return energies_; }
  double operator[](Config x) const noexcept { return energies_[x]; }
  std::size_t size() const noexcept { return energies_.size(); }
  const MixtureSpec& spec() const noexcept { return spec_; }
  std::uint64_t seed() const noexcept { return seed_; }
  DisorderKind kind() const noexcept { return kind_; }

  Config argmax() const;

 private:
  int n_;
  std::vector<double> energies_;
  MixtureSpec spec_;
  std::uint64_t seed_;
  DisorderKind kind_;
};

void check_enumeration_size(int n, int cap = kDefaultEnumerationCap);

/// Parallel Gray-code enumeration. Each block of 2^12 consecutive Gray-code
/// positions starts from one direct evaluation and then walks with
/// single-flip increments (the flipped bit at step t is the ruler sequence).
EnergyTable enumerate(const DisorderTensor& G, int cap = kDefaultEnumerationCap);
EnergyTable enumerate(const MultilinearHamiltonian& H, const DisorderTensor& provenance,
                      int cap = kDefaultEnumerationCap);

/// Serial reference: one full tensor contraction per configuration.
EnergyTable enumerate_reference(const DisorderTensor& G, int cap = kDefaultEnumerationCap);

/// log sum_sigma exp(beta H(sigma)) by stable log-sum-exp.
double log_partition(const EnergyTable& table, double beta);

/// Gibbs measure mu_{beta,G} on a table. Holds a reference to the table.
class GibbsEnsemble {
 public:
  GibbsEnsemble(const EnergyTable& table, double beta);
  GibbsEnsemble(EnergyTable&&, double) = delete;

  const EnergyTable& table() const noexcept { return *table_; }
  double beta() const noexcept { return beta_; }
  double log_z() const noexcept { return log_z_; }
  double log_weight(Config x) const noexcept { return beta_ * (*table_)[x] - log_z_; }
  double probability(Config x) const noexcept;
  std::span<const double> probabilities() const noexcept { return probs_; }

  /// Exact samples by inverse CDF over the 2^N weights.
  std::vector<Config> sample(std::size_t count, std::uint64_t seed) const;
  Config sample_one(std::uint64_t seed, std::uint64_t index) const;

  /// Exact mass of a set.
  double mass(const ConfigSet& set) const;
  double mass(const std::function<bool(Config)>& pred) const;

 private:
  const EnergyTable* table_;
  double beta_;
  double log_z_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

/// S_beta(G) = {sigma : H(sigma) >= beta_level xi(1) N}; closed inequality.
ConfigSet superlevel(const EnergyTable& table, double beta_level, double xi1);

/// Gibbs mass of {sigma : |H/(N xi(1) beta) - 1| <= eps}.
double energy_band_mass(const GibbsEnsemble& ensemble, double eps);

/// Integer Hamming-distance window [lo, hi] from an overlap window on the
/// parity grid overlap = N - 2d. Closed windows keep the endpoints, open ones
/// drop them; tolerance 1e-9 on exact grid points.
struct DistanceRange {
  int lo = 0;
  int hi = -1;
  bool empty() const noexcept { return hi < lo; }
  bool contains(int d) const noexcept { return d >= lo && d <= hi; }
};
DistanceRange distance_range(int n, double q_low, double q_high, bool closed);

/// Same from a normalized Hamming-distance window [r, R] (closed).
DistanceRange distance_range_normalized(int n, double r, double R);

/// Calls f(mask) for every N-bit mask with popcount d, in increasing order.
void for_each_mask_with_popcount(int n, int d, const std::function<void(Config)>& f);

enum class SliceRoute { automatic, subsets, filter };

struct SliceMax {
  double max_energy_per_site = 0.0;  // max H(sigma')/N over the slice
  Config argmax = 0;
  int distance = 0;
  double q_requested = 0.0;
  double q_used = 0.0;
  bool adjusted = false;  // q_requested was off the parity grid
  SliceRoute route = SliceRoute::automatic;
};

/// Nearest feasible Hamming distance for an overlap q on the parity grid.
int nearest_slice_distance(int n, double q, bool* adjusted = nullptr);

/// max {H(sigma')/N : <ref, sigma'> = N q}. `automatic` enumerates the
/// C(N, d) flip subsets when the slice is smaller than 2^N/4 and filters the
/// full table otherwise.
SliceMax slice_max(const EnergyTable& table, Config ref, double q,
                   SliceRoute route = SliceRoute::automatic);

/// Slice maximum straight from the Hamiltonian, no table.
SliceMax slice_max(const MultilinearHamiltonian& H, Config ref, double q);

/// log[2^{-N} sum_sigma exp(beta H(sigma) - beta^2 N xi(1)/2)].
double log_likelihood_ratio(const EnergyTable& table, double beta);

/// Table dump: magic "PSPNTAB1", u32 N, u64 FNV-1a hash of the canonical
/// mixture string, u64 seed, then 2^N little-endian f64 energies.
void write_table(std::ostream& out, const EnergyTable& table);
std::uint64_t mixture_hash(const MixtureSpec& spec);

struct TableHeader {
  int n = 0;
  std::uint64_t spec_hash = 0;
  std::uint64_t seed = 0;
};
/// Reads a dump; the mixture is not stored, so the caller supplies it and
/// its hash is checked.
EnergyTable read_table(std::istream& in, const MixtureSpec& spec, TableHeader* header = nullptr);

}  // namespace pspin
