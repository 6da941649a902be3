#include "pspin/ogp.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "pspin/rng.hpp"
#include "pspin/special.hpp"

namespace pspin {
namespace {

constexpr std::uint64_t kSfStream = 0x5346;
constexpr std::uint64_t kSoftStream = 0x534F4654;
constexpr std::uint64_t kTau1Stream = 0x54415531;
constexpr std::uint64_t kWindowStream = 0x57494E44;
constexpr std::uint64_t kInnerStream = 0x494E4E52;
constexpr std::uint64_t kExceptionalStream = 0x45584350;

template <typename Pred>
bool any_mask(int n, int d, Pred&& pred) {
  if (d < 0 || d > n) return false;
  if (d == 0) return pred(Config{0});
  const Config limit = Config{1} << n;
  Config m = (Config{1} << d) - 1;
  while (m < limit) {
    if (pred(m)) return true;
    const Config c = m & (~m + 1);
    const Config r = m + c;
    m = (((r ^ m) >> 2) / c) | r;
  }
  return false;
}

double slice_volume(int n, DistanceRange range) {
  double v = 0.0;
  for (int d = range.lo; d <= range.hi; ++d) v += binomial(n, d);
  return v;
}

bool witness_in_tensor(const DisorderTensor& G, Config sigma, DistanceRange range, double threshold) {
  if (range.empty()) return false;
  const MultilinearHamiltonian H(G);
  if (slice_volume(G.n(), range) * 8.0 <= std::ldexp(1.0, G.n())) {
    return has_window_witness(H, sigma, range, threshold);
  }
  return has_window_witness(enumerate(H, G), sigma, range, threshold);
}

// One witness test against a precomputed super-level set, choosing the
// cheaper of scanning its members or scanning the slice.
bool witness_in_set(const ConfigSet& level, const std::vector<Config>& level_members, Config sigma,
                    DistanceRange range) {
  if (range.empty()) return false;
  const int n = level.n();
  if (static_cast<double>(level_members.size()) <= slice_volume(n, range)) {
    for (Config y : level_members) {
      if (range.contains(hamming(sigma, y))) return true;
    }
    return false;
  }
  for (int d = range.lo; d <= range.hi; ++d) {
    if (any_mask(n, d, [&](Config mask) { return level.contains(sigma ^ mask); })) return true;
  }
  return false;
}

double level_threshold(const MixtureSpec& spec, int n, double beta_level) {
  return beta_level * spec.xi(1.0) * n;
}

}  // namespace

McEstimate summarize(const std::vector<double>& values) {
  McEstimate out;
  out.replicas = values.size();
  if (values.empty()) return out;
  out.mean = deterministic_sum(values) / static_cast<double>(values.size());
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - out.mean) * (values[i] - out.mean);
    const double var = deterministic_sum(sq) / static_cast<double>(values.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return out;
}

double sf_bound(const MixtureSpec& spec, int n, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("q must lie in [0, 1]");
  if (q == 1.0) return 0.0;
  return 2.0 * std::sqrt(spec.xi(1.0, 1)) * n * normal_pdf(normal_quantile(0.5 * (1.0 + q)));
}

double sf_slice_value(const DisorderTensor& G, double q) {
  return slice_max(MultilinearHamiltonian(G), Config{0}, q).max_energy_per_site * G.n();
}

McEstimate sf_empirical(const MixtureSpec& spec, int n, double q, std::size_t replicas,
                        std::uint64_t seed) {
  if (!(q >= -1.0 && q <= 1.0)) throw ValidationError("q must lie in [-1, 1]");
  check_enumeration_size(n);
  std::vector<double> values(replicas);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(replicas); ++r) {
    const auto G = sample_null(n, spec, derive_seed(seed, kSfStream, static_cast<std::uint64_t>(r)));
    values[static_cast<std::size_t>(r)] = sf_slice_value(G, q);
  }
  return summarize(values);
}

bool has_window_witness(const MultilinearHamiltonian& H, Config sigma, DistanceRange range,
                        double threshold) {
  for (int d = range.lo; d <= range.hi; ++d) {
    if (any_mask(H.n(), d, [&](Config mask) { return H.energy(sigma ^ mask) >= threshold; })) {
      return true;
    }
  }
  return false;
}

bool has_window_witness(const EnergyTable& table, Config sigma, DistanceRange range,
                        double threshold) {
  for (int d = range.lo; d <= range.hi; ++d) {
    if (any_mask(table.n(), d, [&](Config mask) { return table[sigma ^ mask] >= threshold; })) {
      return true;
    }
  }
  return false;
}

const char* to_string(OgpMode mode) {
  return mode == OgpMode::null_model ? "null" : "planted";
}

SoftOgpEstimate soft_ogp_estimate(OgpMode mode, int n, const MixtureSpec& spec, double beta,
                                  double beta_prime, const OgpBand& band, double tau,
                                  std::size_t outer_replicas, std::size_t inner_samples,
                                  std::uint64_t seed) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in [0, 1]");
  if (!(beta >= 0.0)) throw ValidationError("beta must be >= 0");
  if (!(beta_prime <= beta)) throw ValidationError("beta_prime must not exceed beta");
  if (outer_replicas == 0 || inner_samples == 0) throw ValidationError("replica counts must be >= 1");
  check_enumeration_size(n);

  SoftOgpEstimate out;
  out.tau = tau;
  out.band = band;
  out.beta = beta;
  out.beta_prime = beta_prime;
  out.replicas = outer_replicas;
  out.mode = mode;
  const DistanceRange range = distance_range(n, band.q_low, band.q_high, true);
  if (range.empty()) {
    out.empty_window = true;
    return out;
  }

  const double threshold = level_threshold(spec, n, beta_prime);
  std::vector<double> values(outer_replicas);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(outer_replicas); ++r) {
    const std::uint64_t s = derive_seed(seed, kSoftStream, static_cast<std::uint64_t>(r));
    double value = 0.0;
    if (mode == OgpMode::null_model) {
      const auto G = sample_null(n, spec, derive_seed(s, 1));
      const auto Gp = sample_null(n, spec, derive_seed(s, 2));
      const auto table = enumerate(G);
      const GibbsEnsemble mu(table, beta);
      const auto tau_table = enumerate(interpolate(G, Gp, tau));
      const ConfigSet level = superlevel(tau_table, beta_prime, spec.xi(1.0));
      const std::vector<Config> members = level.members();
      std::size_t hits = 0;
      for (std::size_t i = 0; i < inner_samples; ++i) {
        const Config sigma = mu.sample_one(derive_seed(s, 3), i);
        if (witness_in_set(level, members, sigma, range)) ++hits;
      }
      value = static_cast<double>(hits) / static_cast<double>(inner_samples);
    } else {
      const auto inst = sample_planted(n, spec, beta, derive_seed(s, 1));
      const auto Gp = sample_null(n, spec, derive_seed(s, 2));
      value = witness_in_tensor(interpolate(inst.G, Gp, tau), inst.sigma_star, range, threshold) ? 1.0 : 0.0;
    }
    values[static_cast<std::size_t>(r)] = value;
  }
  const McEstimate est = summarize(values);
  out.estimate = est.mean;
  out.std_error = est.std_error;
  return out;
}

std::vector<double> tau1_max_overlaps(int n, const MixtureSpec& spec, double beta,
                                      std::size_t replicas, std::uint64_t seed) {
  check_enumeration_size(n);
  const double threshold = level_threshold(spec, n, beta);
  std::vector<double> out(replicas);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(replicas); ++r) {
    const auto table =
        enumerate(sample_null(n, spec, derive_seed(seed, kTau1Stream, static_cast<std::uint64_t>(r))));
    int best = n + 1;  // sentinel: no member yet
    for (std::size_t x = 0; x < table.size(); ++x) {
      if (table[x] >= threshold) {
        const int ov = n - 2 * std::popcount(static_cast<Config>(x));
        if (best == n + 1 || ov > best) best = ov;
      }
    }
    out[static_cast<std::size_t>(r)] =
        best == n + 1 ? -std::numeric_limits<double>::infinity() : static_cast<double>(best) / n;
  }
  return out;
}

McEstimate tau1_probability(int n, const MixtureSpec& spec, double beta, double q_low,
                            std::size_t replicas, std::uint64_t seed) {
  const auto overlaps = tau1_max_overlaps(n, spec, beta, replicas, seed);
  std::vector<double> hits(overlaps.size());
  for (std::size_t r = 0; r < overlaps.size(); ++r) {
    hits[r] = overlaps[r] * n >= q_low * n - 1e-9 ? 1.0 : 0.0;
  }
  return summarize(hits);
}

McEstimate open_window_probability(int n, const MixtureSpec& spec, double beta_prime,
                                   const OgpBand& band, std::size_t replicas, std::uint64_t seed) {
  check_enumeration_size(n);
  const DistanceRange range = distance_range(n, band.q_low, band.q_high, false);
  const double threshold = level_threshold(spec, n, beta_prime);
  std::vector<double> hits(replicas, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(replicas); ++r) {
    const auto G = sample_null(n, spec, derive_seed(seed, kWindowStream, static_cast<std::uint64_t>(r)));
    hits[static_cast<std::size_t>(r)] = witness_in_tensor(G, Config{0}, range, threshold) ? 1.0 : 0.0;
  }
  return summarize(hits);
}

double membership_threshold(int n, double c) {
  if (!(c >= 0.0)) throw ValidationError("rate c must be >= 0");
  return std::exp(-c * n / 2.0);
}

Membership classify_membership(double conditional_prob, std::size_t inner, int n, double c) {
  Membership m;
  m.in_domain = true;
  m.inner_replicas = inner;
  m.conditional_prob = conditional_prob;
  m.std_error = inner > 0 ? std::sqrt(conditional_prob * (1.0 - conditional_prob) / inner) : 0.0;
  m.threshold = membership_threshold(n, c);
  m.member = inner > 0 && conditional_prob >= m.threshold;
  m.indeterminate = m.std_error > 0.0 && std::abs(conditional_prob - m.threshold) < 2.0 * m.std_error;
  return m;
}

std::vector<McEstimate> conditional_witness_probabilities(Config sigma, const DisorderTensor& G,
                                                          double beta_prime, const OgpBand& band,
                                                          const std::vector<double>& taus,
                                                          std::size_t inner, std::uint64_t seed) {
  const int n = G.n();
  const DistanceRange range = distance_range(n, band.q_low, band.q_high, false);
  const double threshold = level_threshold(G.spec(), n, beta_prime);
  std::vector<std::vector<double>> hits(taus.size(), std::vector<double>(inner, 0.0));
  if (!range.empty()) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(inner); ++i) {
      const auto Gp = sample_null(n, G.spec(), derive_seed(seed, kInnerStream, static_cast<std::uint64_t>(i)));
      for (std::size_t t = 0; t < taus.size(); ++t) {
        if (witness_in_tensor(interpolate(G, Gp, taus[t]), sigma, range, threshold)) {
          hits[t][static_cast<std::size_t>(i)] = 1.0;
        }
      }
    }
  }
  std::vector<McEstimate> out;
  out.reserve(taus.size());
  for (auto& h : hits) {
    McEstimate e;
    e.replicas = inner;
    e.mean = inner > 0 ? deterministic_sum(h) / static_cast<double>(inner) : 0.0;
    e.std_error = inner > 0 ? std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(inner)) : 0.0;
    out.push_back(e);
  }
  return out;
}

Membership exceptional_membership(Config sigma, const DisorderTensor& G, double beta_prime,
                                  const OgpBand& band, double tau, double c, std::size_t inner,
                                  std::uint64_t seed) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in [0, 1]");
  if (inner == 0) throw ValidationError("inner replica count must be >= 1");
  const int n = G.n();
  Membership m;
  m.threshold = membership_threshold(n, c);
  m.inner_replicas = inner;
  if (energy(G, sigma) < level_threshold(G.spec(), n, beta_prime)) return m;
  const auto est = conditional_witness_probabilities(sigma, G, beta_prime, band, {tau}, inner, seed);
  return classify_membership(est.front().mean, inner, n, c);
}

std::vector<double> tau_grid(int K) {
  if (K < 1) throw ValidationError("grid size K must be >= 1");
  std::vector<double> taus(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) taus[static_cast<std::size_t>(k)] = static_cast<double>(k) / K;
  return taus;
}

ExceptionalMass exceptional_mass(int n, const MixtureSpec& spec, double beta, double beta_prime,
                                 const OgpBand& band, int K, double c, std::size_t replicas,
                                 std::size_t inner, std::uint64_t seed) {
  if (replicas == 0 || inner == 0) throw ValidationError("replica counts must be >= 1");
  check_enumeration_size(n);
  const std::vector<double> taus = tau_grid(K);
  const double level = level_threshold(spec, n, beta_prime);
  ExceptionalMass out;
  out.samples = replicas;
  out.indicators.assign(replicas, 0);
  std::vector<int> undecided(replicas, 0);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t rr = 0; rr < static_cast<std::int64_t>(replicas); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    const std::uint64_t s = derive_seed(seed, kExceptionalStream, r);
    const auto G = sample_null(n, spec, derive_seed(s, 1));
    const auto table = enumerate(G);
    const GibbsEnsemble mu(table, beta);
    const Config sigma = mu.sample_one(derive_seed(s, 2), 0);
    if (table[sigma] < level) continue;
    const auto probs = conditional_witness_probabilities(sigma, G, beta_prime, band, taus, inner,
                                                         derive_seed(s, 3));
    for (const auto& p : probs) {
      const Membership m = classify_membership(p.mean, inner, n, c);
      if (m.member) out.indicators[r] = 1;
      if (m.indeterminate) undecided[r] = 1;
    }
  }
  std::vector<double> values(out.indicators.begin(), out.indicators.end());
  const McEstimate est = summarize(values);
  out.estimate = est.mean;
  out.std_error = est.std_error;
  for (int u : undecided) out.indeterminate += static_cast<std::size_t>(u);
  return out;
}

}  // namespace pspin
