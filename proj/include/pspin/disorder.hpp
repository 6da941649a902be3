#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "pspin/common.hpp"
#include "pspin/mixture.hpp"

namespace pspin {

enum class DisorderKind : std::uint8_t { null = 0, planted = 1, interpolated = 2 };

const char* to_string(DisorderKind kind);

/// Default cap on the total number of stored couplings, sum_k N^k.
inline constexpr std::uint64_t kDefaultCouplingCap = 100'000'000;

/// sum_k N^k for the degrees of `spec`; throws ResourceError naming the
/// offending N^k when it exceeds `cap`.
std::uint64_t checked_coupling_count(int n, const MixtureSpec& spec,
                                     std::uint64_t cap = kDefaultCouplingCap);

/// I.i.d. Gaussian couplings g_{i1..ik} for every degree of the mixture,
/// stored per degree over ordered tuples in mixed-radix order (i1 most
/// significant). Immutable after construction.
class DisorderTensor {
 public:
  DisorderTensor(int n, MixtureSpec spec, std::vector<std::vector<double>> couplings,
                 std::uint64_t seed, DisorderKind kind);

  /// All couplings zero.
  static DisorderTensor zeros(int n, const MixtureSpec& spec);

  int n() const noexcept { return n_; }
  const MixtureSpec& spec() const noexcept { return spec_; }
  std::uint64_t seed() const noexcept { return seed_; }
  DisorderKind kind() const noexcept { return kind_; }

  /// Couplings of the t-th mixture term (same order as spec().terms()).
  std::span<const double> couplings(std::size_t term) const { return couplings_.at(term); }
  std::size_t term_count() const noexcept { return couplings_.size(); }

  /// M = sum_k N^k, the input dimension of an algorithm reading this tensor.
  std::size_t coupling_count() const noexcept;

  /// Scale gamma_k N^{-(k-1)/2} applied to every coupling of term t.
  double term_scale(std::size_t term) const;

  friend bool operator==(const DisorderTensor&, const DisorderTensor&) = default;

 private:
  int n_;
  MixtureSpec spec_;
  std::vector<std::vector<double>> couplings_;
  std::uint64_t seed_;
  DisorderKind kind_;
};

/// Disorder tilted toward a hidden configuration sigma_star:
/// g = beta gamma_k N^{-(k-1)/2} sigma*_{i1}...sigma*_{ik} + g_tilde.
struct PlantedInstance {
  Config sigma_star = 0;
  DisorderTensor G;
  DisorderTensor G_tilde;
  double beta = 0.0;
};

/// Reproducible from (seed): coupling j of degree k is normal_at(seed, k, j),
/// independent of generation order and worker count.
DisorderTensor sample_null(int n, const MixtureSpec& spec, std::uint64_t seed,
                           std::uint64_t cap = kDefaultCouplingCap);

/// sigma_star is uniform on the hypercube; G_tilde equals sample_null(n, spec,
/// seed). Needs n <= 64.
PlantedInstance sample_planted(int n, const MixtureSpec& spec, double beta, std::uint64_t seed,
                               std::uint64_t cap = kDefaultCouplingCap);

/// G_tau = (1 - tau) G + sqrt(2 tau - tau^2) G'.
DisorderTensor interpolate(const DisorderTensor& G, const DisorderTensor& G_prime, double tau);

/// H_N(sigma) by full tensor contraction. Serial reference implementation.
double energy(const DisorderTensor& G, std::span<const int> sigma);
double energy(const DisorderTensor& G, Config sigma);

/// H(sigma with site i flipped) - H(sigma), summing only tuples that contain
/// i; tuples holding i an even number of times contribute nothing.
double flip_delta(const DisorderTensor& G, std::span<const int> sigma, int i);
double flip_delta(const DisorderTensor& G, Config sigma, int i);

/// Binary dump: magic "PSPNDIS1", u32 version, u32 N, u32 #degrees, then per
/// degree (u32 k, f64 gamma_k), u64 seed, u8 kind, then per degree N^k
/// little-endian f64 couplings in mixed-radix order.
void write_disorder(std::ostream& out, const DisorderTensor& G);
DisorderTensor read_disorder(std::istream& in, std::uint64_t cap = kDefaultCouplingCap);

/// Multilinear form of H on the hypercube. Since sigma_i^2 = 1, every ordered
/// tuple reduces to the set S of indices it holds an odd number of times, and
/// H(x) = c + sum_S J_S (-1)^{|S & x|}. This is the form the enumeration and
/// search kernels run on; needs n <= 64.
class MultilinearHamiltonian {
 public:
  struct Term {
    Config mask = 0;
    double coef = 0.0;
  };

  explicit MultilinearHamiltonian(const DisorderTensor& G);

  int n() const noexcept { return n_; }
  double constant() const noexcept { return constant_; }
  std::span<const Term> terms() const noexcept { return terms_; }

  double energy(Config x) const noexcept;

  /// H(x ^ (1 << i)) - H(x).
  double flip_delta(Config x, int i) const noexcept;

 private:
  int n_;
  double constant_ = 0.0;
  std::vector<Term> terms_;
  // Terms containing site i, stored with bit i cleared.
  std::vector<std::vector<Term>> site_terms_;
};

}  // namespace pspin
