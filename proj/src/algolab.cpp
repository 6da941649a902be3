#include "pspin/algolab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "pspin/landscape.hpp"
#include "pspin/rng.hpp"

namespace pspin {
namespace {

constexpr std::uint64_t kChiStream = 0x434849;
constexpr std::uint64_t kConcStream = 0x434F4E43;
constexpr std::uint64_t kRarityStream = 0x52415245;

std::vector<double> config_to_vector(Config x, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = spin(x, i);
  return v;
}

double dot_per_site(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw IncompatibleError("algorithm outputs differ in length");
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i];
  return deterministic_sum(prod) / static_cast<double>(a.size());
}

class ConstantAlgorithm final : public SearchAlgorithm {
 public:
  explicit ConstantAlgorithm(Config sigma0) : sigma0_(sigma0) {}
  std::string name() const override { return "constant"; }
  std::vector<double> run(const DisorderTensor& G) const override {
    return config_to_vector(sigma0_, G.n());
  }
  std::optional<double> lipschitz() const override { return 0.0; }

 private:
  Config sigma0_;
};

class DiagonalAlgorithm final : public SearchAlgorithm {
 public:
  explicit DiagonalAlgorithm(double scale) : scale_(scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("diagonal scale must be > 0");
  }
  std::string name() const override { return "diagonal"; }
  std::vector<double> run(const DisorderTensor& G) const override {
    const std::size_t t = G.term_count() - 1;
    const int k = G.spec().terms()[t].degree;
    const auto g = G.couplings(t);
    const auto n = static_cast<std::size_t>(G.n());
    // Offset of (i, i, ..., i) in mixed radix: i (N^{k-1} + ... + 1).
    std::size_t stride = 0;
    for (int j = 0; j < k; ++j) stride = stride * n + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(scale_ * g[i * stride], -1.0, 1.0);
    return out;
  }
  std::optional<double> lipschitz() const override { return scale_; }

 private:
  double scale_;
};

class GreedyAlgorithm final : public SearchAlgorithm {
 public:
  explicit GreedyAlgorithm(int max_sweeps) : max_sweeps_(max_sweeps) {
    if (max_sweeps < 1) throw ValidationError("greedy needs max_sweeps >= 1");
  }
  std::string name() const override { return "greedy"; }
  std::vector<double> run(const DisorderTensor& G) const override {
    return config_to_vector(greedy_ascent(MultilinearHamiltonian(G), max_sweeps_).x, G.n());
  }
  std::optional<double> lipschitz() const override { return std::nullopt; }

 private:
  int max_sweeps_;
};

class HashControl final : public SearchAlgorithm {
 public:
  std::string name() const override { return "hash"; }
  std::vector<double> run(const DisorderTensor& G) const override {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (std::size_t t = 0; t < G.term_count(); ++t) {
      for (double g : G.couplings(t)) {
        std::uint64_t bits;
        std::memcpy(&bits, &g, sizeof bits);
        h = mix64(h ^ bits);
      }
    }
    const double s = (h >> 63) ? -1.0 : 1.0;
    return std::vector<double>(static_cast<std::size_t>(G.n()), s);
  }
  std::optional<double> lipschitz() const override { return 1.0; }
};

double interpolate_curve(const ChiCurve& c, double tau) {
  if (c.tau.empty()) throw ValidationError("empty chi curve");
  if (tau <= c.tau.front()) return c.chi.front();
  if (tau >= c.tau.back()) return c.chi.back();
  const auto it = std::upper_bound(c.tau.begin(), c.tau.end(), tau);
  const auto j = static_cast<std::size_t>(it - c.tau.begin());
  const double t0 = c.tau[j - 1];
  const double t1 = c.tau[j];
  const double w = (tau - t0) / (t1 - t0);
  return (1.0 - w) * c.chi[j - 1] + w * c.chi[j];
}

}  // namespace

std::unique_ptr<SearchAlgorithm> baseline_constant(Config sigma0) {
  return std::make_unique<ConstantAlgorithm>(sigma0);
}

std::unique_ptr<SearchAlgorithm> baseline_diagonal(double scale) {
  return std::make_unique<DiagonalAlgorithm>(scale);
}

std::unique_ptr<SearchAlgorithm> baseline_greedy(int max_sweeps) {
  return std::make_unique<GreedyAlgorithm>(max_sweeps);
}

std::unique_ptr<SearchAlgorithm> unstable_hash_control() { return std::make_unique<HashControl>(); }

std::unique_ptr<SearchAlgorithm> make_algorithm(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (kind == "constant" && arg.empty()) return baseline_constant();
    if (kind == "diagonal") return baseline_diagonal(arg.empty() ? 0.2 : std::stod(arg));
    if (kind == "greedy") return baseline_greedy(arg.empty() ? 100 : std::stoi(arg));
    if (kind == "hash" && arg.empty()) return unstable_hash_control();
  } catch (const std::logic_error&) {
    throw ValidationError("bad algorithm parameter in '" + text + "'");
  }
  throw ValidationError("unknown algorithm '" + text + "' (constant, diagonal:S, greedy:M, hash)");
}

GreedyResult greedy_ascent(const MultilinearHamiltonian& H, int max_sweeps) {
  GreedyResult res;
  for (res.sweeps = 0; res.sweeps < max_sweeps;) {
    bool flipped = false;
    for (int i = 0; i < H.n(); ++i) {
      if (H.flip_delta(res.x, i) > 0.0) {
        res.x ^= Config{1} << i;
        flipped = true;
      }
    }
    ++res.sweeps;
    if (!flipped) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Config round_to_hypercube(const std::vector<double>& x) {
  if (x.size() > kMaxPackedSites) throw ValidationError("too many sites to pack");
  Config c = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) c |= Config{1} << i;
  }
  return c;
}

double energy_real(const DisorderTensor& G, const std::vector<double>& x) {
  const int n = G.n();
  if (x.size() != static_cast<std::size_t>(n)) throw IncompatibleError("point length differs from N");
  double total = 0.0;
  for (std::size_t t = 0; t < G.term_count(); ++t) {
    const int k = G.spec().terms()[t].degree;
    const auto g = G.couplings(t);
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    double sum = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      double prod = 1.0;
      for (int a = 0; a < k; ++a) prod *= x[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
      sum += g[j] * prod;
      for (int a = k - 1; a >= 0; --a) {
        auto& v = idx[static_cast<std::size_t>(a)];
        if (++v < n) break;
        v = 0;
      }
    }
    total += G.term_scale(t) * sum;
  }
  return total;
}

ChiCurve chi_estimate(const SearchAlgorithm& alg, int n, const MixtureSpec& spec,
                      const std::vector<double>& tau_grid, std::size_t replicas, std::uint64_t seed) {
  if (replicas == 0) throw ValidationError("replica count must be >= 1");
  if (tau_grid.empty() || !std::is_sorted(tau_grid.begin(), tau_grid.end()) ||
      tau_grid.front() < 0.0 || tau_grid.back() > 1.0) {
    throw ValidationError("tau grid must be sorted inside [0, 1]");
  }
  ChiCurve curve;
  curve.algorithm = alg.name();
  curve.n = n;
  curve.spec = spec;
  curve.tau = tau_grid;
  curve.replicas = replicas;
  curve.values.assign(replicas, std::vector<double>(tau_grid.size(), 0.0));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(replicas); ++r) {
    const std::uint64_t s = derive_seed(seed, kChiStream, static_cast<std::uint64_t>(r));
    const auto G = sample_null(n, spec, derive_seed(s, 1));
    const auto Gp = sample_null(n, spec, derive_seed(s, 2));
    const auto a = alg.run(G);
    for (std::size_t t = 0; t < tau_grid.size(); ++t) {
      curve.values[static_cast<std::size_t>(r)][t] = dot_per_site(a, alg.run(interpolate(G, Gp, tau_grid[t])));
    }
  }
  for (std::size_t t = 0; t < tau_grid.size(); ++t) {
    std::vector<double> column(replicas);
    for (std::size_t r = 0; r < replicas; ++r) column[r] = curve.values[r][t];
    const McEstimate e = summarize(column);
    curve.chi.push_back(e.mean);
    curve.std_error.push_back(e.std_error);
  }
  return curve;
}

McEstimate chi_ratio(const ChiCurve& curve, std::size_t t) {
  const std::size_t m = curve.replicas;
  const double m0 = curve.chi.at(0);
  const double mt = curve.chi.at(t);
  if (m0 == 0.0) throw ValidationError("chi(tau_0) is zero");
  McEstimate out;
  out.replicas = m;
  out.mean = mt / m0;
  if (m > 1) {
    double v0 = 0.0, vt = 0.0, cov = 0.0;
    for (const auto& row : curve.values) {
      v0 += (row[0] - m0) * (row[0] - m0);
      vt += (row[t] - mt) * (row[t] - mt);
      cov += (row[0] - m0) * (row[t] - mt);
    }
    const double denom = static_cast<double>(m - 1);
    v0 /= denom;
    vt /= denom;
    cov /= denom;
    const double var = (vt + out.mean * out.mean * v0 - 2.0 * out.mean * cov) / static_cast<double>(m);
    out.std_error = std::sqrt(std::max(var, 0.0)) / std::abs(m0);
  }
  return out;
}

ConcentrationCheck chi_concentration_check(const SearchAlgorithm& alg, int n, const MixtureSpec& spec,
                                           double tau, std::size_t replicas,
                                           const std::vector<double>& t_grid, std::uint64_t seed) {
  const ChiCurve curve = chi_estimate(alg, n, spec, {tau}, replicas, derive_seed(seed, kConcStream));
  ConcentrationCheck out;
  out.algorithm = alg.name();
  out.tau = tau;
  out.chi = curve.chi[0];
  const auto claimed = alg.lipschitz();
  out.applicable = claimed.has_value();
  out.lipschitz = claimed ? *claimed : curve.std_error[0] * std::sqrt(static_cast<double>(replicas) * n);
  for (double t : t_grid) {
    if (!(t > 0.0)) throw ValidationError("deviation levels t must be > 0");
    ConcentrationRow row;
    row.t = t;
    std::size_t hits = 0;
    for (const auto& v : curve.values) {
      if (std::abs(v[0] - out.chi) >= t) ++hits;
    }
    row.exceedance = static_cast<double>(hits) / static_cast<double>(replicas);
    row.std_error = std::sqrt(row.exceedance * (1.0 - row.exceedance) / static_cast<double>(replicas));
    row.bound = out.lipschitz == 0.0 ? 0.0
                                     : 2.0 * std::exp(-n * t * t / (8.0 * out.lipschitz * out.lipschitz));
    row.pass = row.exceedance <= row.bound + 3.0 * row.std_error;
    if (out.applicable && !row.pass) out.violated = true;
    out.rows.push_back(row);
  }
  return out;
}

int grid_size(double L, double width) {
  if (!(width > 0.0)) throw ValidationError("band width must be > 0");
  if (!(L >= 0.0)) throw ValidationError("L must be >= 0");
  return std::max(1, static_cast<int>(std::ceil(10.0 * L * L / width - 1e-9)));
}

GridSelection grid_tau_select(const ChiCurve& chi, const OgpBand& band, double delta, double L) {
  const double width = band.q_high - band.q_low;
  if (!(delta > 0.0 && delta < width / 2.0)) {
    throw ValidationError("delta must satisfy 0 < delta < (q_high - q_low)/2");
  }
  GridSelection sel;
  sel.K = grid_size(L, width);
  const double lo = band.q_low + delta;
  const double hi = band.q_high - delta;
  const double at0 = interpolate_curve(chi, 0.0);
  const double at1 = interpolate_curve(chi, 1.0);
  if (!(at0 > hi)) {
    sel.precondition_ok = false;
    sel.precondition_failure = "tau=0: chi(0) <= q_high - delta";
  } else if (!(at1 < lo)) {
    sel.precondition_ok = false;
    sel.precondition_failure = "tau=1: chi(1) >= q_low + delta";
  }
  if (!sel.precondition_ok) return sel;

  const double mid = 0.5 * (lo + hi);
  double best_gap = std::numeric_limits<double>::infinity();
  for (int k = 1; k < sel.K; ++k) {
    const double tau = static_cast<double>(k) / sel.K;
    const double v = interpolate_curve(chi, tau);
    if (v > lo && v < hi) {
      sel.k = k;
      sel.tau_k = tau;
      sel.chi_at_k = v;
      sel.witness = true;
      return sel;
    }
    if (std::abs(v - mid) < best_gap) {
      best_gap = std::abs(v - mid);
      sel.k = k;
      sel.tau_k = tau;
      sel.chi_at_k = v;
    }
  }
  return sel;
}

RarityReport rarity_report(const SearchAlgorithm& alg, int n, const MixtureSpec& spec, double beta,
                           double beta_prime, const OgpBand& band, int K, double c,
                           std::size_t replicas, std::size_t inner, std::uint64_t seed) {
  if (replicas < 2 || inner == 0) throw ValidationError("rarity needs replicas >= 2 and inner >= 1");
  if (!(beta_prime <= beta)) throw ValidationError("beta_prime must not exceed beta");
  check_enumeration_size(n);
  const std::vector<double> taus = tau_grid(K);
  const double xi1 = spec.xi(1.0);
  const double level = beta * xi1 * n;
  const double level_prime = beta_prime * xi1 * n;

  std::vector<double> a(replicas), b(replicas), e(replicas), d(replicas), lhs(replicas);
  std::vector<double> raw(replicas), rounded(replicas);
  const auto in_union = [&](Config x, const DisorderTensor& G, std::uint64_t s) {
    const auto probs = conditional_witness_probabilities(x, G, beta_prime, band, taus, inner, s);
    for (const auto& p : probs) {
      if (classify_membership(p.mean, inner, n, c).member) return true;
    }
    return false;
  };
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t rr = 0; rr < static_cast<std::int64_t>(replicas); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    const std::uint64_t s = derive_seed(seed, kRarityStream, r);
    const auto G = sample_null(n, spec, derive_seed(s, 1));
    const auto out = alg.run(G);
    const Config x = round_to_hypercube(out);
    const auto table = enumerate(G);
    raw[r] = energy_real(G, out) / n;
    rounded[r] = table[x] / n;
    a[r] = table[x] < level ? 1.0 : 0.0;
    b[r] = table[x] < level_prime ? 1.0 : 0.0;
    e[r] = (b[r] == 0.0 && in_union(x, G, derive_seed(s, 3))) ? 1.0 : 0.0;
    const GibbsEnsemble mu(table, beta);
    const Config sigma = mu.sample_one(derive_seed(s, 2), 0);
    d[r] = (table[sigma] >= level_prime && in_union(sigma, G, derive_seed(s, 4))) ? 1.0 : 0.0;
    lhs[r] = e[r] + 4.0 * b[r];
  }

  RarityReport rep;
  rep.algorithm = alg.name();
  rep.n = n;
  rep.beta = beta;
  rep.beta_prime = beta_prime;
  rep.K = K;
  rep.c = c;
  rep.replicas = replicas;
  rep.inner = inner;
  rep.not_in_s_beta = summarize(a);
  rep.not_in_s_beta_prime = summarize(b);
  rep.in_exceptional = summarize(e);
  rep.gibbs_exceptional = summarize(d);
  rep.failure_lhs = summarize(lhs);
  rep.mean_energy_raw = summarize(raw).mean;
  rep.mean_energy_rounded = summarize(rounded).mean;

  const std::size_t half = replicas / 2;
  const auto split = [&](const std::string& name, const std::vector<double>& v) {
    const McEstimate first = summarize({v.begin(), v.begin() + static_cast<std::ptrdiff_t>(half)});
    const McEstimate second = summarize({v.begin() + static_cast<std::ptrdiff_t>(half), v.end()});
    SplitCheck chk;
    chk.term = name;
    chk.first = first.mean;
    chk.second = second.mean;
    chk.combined_se = std::hypot(first.std_error, second.std_error);
    chk.consistent = std::abs(first.mean - second.mean) <= 3.0 * chk.combined_se ||
                     first.mean == second.mean;
    rep.split_consistent = rep.split_consistent && chk.consistent;
    rep.split.push_back(chk);
  };
  split("not_in_s_beta", a);
  split("not_in_s_beta_prime", b);
  split("in_exceptional", e);
  split("gibbs_exceptional", d);
  split("failure_lhs", lhs);
  return rep;
}

}  // namespace pspin
