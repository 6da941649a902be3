#include "pspin/shattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "pspin/special.hpp"

namespace pspin {
namespace {

constexpr double kTol = 1e-9;

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void join(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

double ball_volume(int n, int radius) {
  double v = 0.0;
  for (int d = 0; d <= std::min(radius, n); ++d) v += binomial(n, d);
  return v;
}

}  // namespace

void ShatterParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be finite and > 0");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("eps must be finite and > 0");
  if (!band.feasible) throw ValidationError("band is infeasible: " + band.diagnostic);
  if (!(band.r >= 0.0 && band.r < band.R && band.R <= 1.0)) {
    throw ValidationError("band radii must satisfy 0 <= r < R <= 1");
  }
}

RegularSet regular_set(const EnergyTable& table, const ShatterParams& params) {
  params.validate();
  const int n = table.n();
  const double xi1 = table.spec().xi(1.0);
  const double scale = n * params.beta * xi1;
  const double half = params.eps / 2.0;
  RegularSet out{ConfigSet(n), ConfigSet(n), ConfigSet(n)};

  for (std::size_t x = 0; x < table.size(); ++x) {
    if (std::abs(table[x] / scale - 1.0) <= half) out.in_band.insert(static_cast<Config>(x));
  }

  const ConfigSet high = superlevel(table, (1.0 - half) * params.beta, xi1);
  const DistanceRange shell = distance_range_normalized(n, params.band.r, params.band.R);
  if (!shell.empty()) {
    for (Config t : high.members()) {
      for (int d = shell.lo; d <= shell.hi; ++d) {
        for_each_mask_with_popcount(n, d, [&](Config mask) { out.shell_failure.insert(t ^ mask); });
      }
    }
  }

  for (Config x : out.in_band.members()) {
    if (!out.shell_failure.contains(x)) out.members.insert(x);
  }
  return out;
}

bool is_regular_reference(const EnergyTable& table, const ShatterParams& params, Config sigma) {
  const int n = table.n();
  const double xi1 = table.spec().xi(1.0);
  const double half = params.eps / 2.0;
  if (std::abs(table[sigma] / (n * params.beta * xi1) - 1.0) > half) return false;
  const double threshold = (1.0 - half) * params.beta * xi1 * n;
  for (std::size_t y = 0; y < table.size(); ++y) {
    if (table[y] < threshold) continue;
    const double d = static_cast<double>(hamming(sigma, static_cast<Config>(y))) / n;
    if (d >= params.band.r - kTol / n && d <= params.band.R + kTol / n) return false;
  }
  return true;
}

ClusterDecomposition build_clusters(const ConfigSet& regular, const OgpBand& band,
                                    const GibbsEnsemble* mu, std::size_t cap) {
  const int n = regular.n();
  ClusterDecomposition dec;
  dec.n = n;
  dec.regular = regular;
  const std::vector<Config> members = regular.members();
  const std::size_t m = members.size();
  if (m > cap) {
    throw ResourceError("regular set has " + std::to_string(m) + " points, above the cap of " +
                        std::to_string(cap));
  }
  if (m == 0) return dec;

  const int join_radius = static_cast<int>(std::floor(2.0 * band.r * n + kTol));
  const DistanceRange shell = distance_range_normalized(n, band.r, band.R);
  const double dichotomy_limit = (band.R - band.r) * n + kTol;
  const double outer_limit = band.R * n + kTol;

  UnionFind uf(m);
  if (ball_volume(n, join_radius) < static_cast<double>(m)) {
    for (std::size_t i = 0; i < m; ++i) {
      for (int d = 1; d <= join_radius; ++d) {
        for_each_mask_with_popcount(n, d, [&](Config mask) {
          const Config y = members[i] ^ mask;
          if (y > members[i] && regular.contains(y)) {
            const auto j = static_cast<std::size_t>(
                std::lower_bound(members.begin(), members.end(), y) - members.begin());
            uf.join(i, j);
          }
        });
      }
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        if (hamming(members[i], members[j]) <= join_radius) uf.join(i, j);
      }
    }
  }

  // Roots are the smallest index of each component, so clusters come out
  // ordered by their smallest member.
  std::vector<std::size_t> cluster_of(m);
  std::vector<std::size_t> root_to_cluster(m, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t root = uf.find(i);
    if (root_to_cluster[root] == std::numeric_limits<std::size_t>::max()) {
      root_to_cluster[root] = dec.clusters.size();
      dec.clusters.emplace_back();
      dec.representatives.push_back(members[i]);
    }
    cluster_of[i] = root_to_cluster[root];
    dec.clusters[cluster_of[i]].push_back(members[i]);
  }
  const std::size_t k = dec.clusters.size();

  std::vector<int> diameter(k, 0);
  int min_sep = n + 1;
  std::size_t dichotomy = 0;
  std::size_t shell_pairs = 0;
  std::vector<std::pair<std::size_t, std::size_t>> close;

#pragma omp parallel
  {
    std::vector<int> local_diam(k, 0);
    int local_sep = n + 1;
    std::size_t local_dich = 0;
    std::size_t local_shell = 0;
    std::vector<std::pair<std::size_t, std::size_t>> local_close;
#pragma omp for schedule(dynamic, 64) nowait
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(m); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      for (std::size_t j = i + 1; j < m; ++j) {
        const int d = hamming(members[i], members[j]);
        if (shell.contains(d)) ++local_shell;
        const std::size_t a = cluster_of[i];
        const std::size_t b = cluster_of[j];
        if (a == b) {
          local_diam[a] = std::max(local_diam[a], d);
        } else {
          local_sep = std::min(local_sep, d);
          if (d <= dichotomy_limit) ++local_dich;
          if (d <= outer_limit) local_close.emplace_back(std::min(a, b), std::max(a, b));
        }
      }
    }
#pragma omp critical
    {
      for (std::size_t c = 0; c < k; ++c) diameter[c] = std::max(diameter[c], local_diam[c]);
      min_sep = std::min(min_sep, local_sep);
      dichotomy += local_dich;
      shell_pairs += local_shell;
      close.insert(close.end(), local_close.begin(), local_close.end());
    }
  }
  std::sort(close.begin(), close.end());
  close.erase(std::unique(close.begin(), close.end()), close.end());

  dec.dichotomy_violations = dichotomy;
  dec.shell_pairs = shell_pairs;
  dec.has_separation = k > 1;
  dec.min_separation = k > 1 ? static_cast<double>(min_sep) / n : 0.0;
  dec.close_cluster_pairs = std::move(close);

  dec.stats.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    dec.stats[c].size = dec.clusters[c].size();
    dec.stats[c].diameter = static_cast<double>(diameter[c]) / n;
    if (mu) {
      std::vector<double> p;
      p.reserve(dec.clusters[c].size());
      for (Config x : dec.clusters[c]) p.push_back(mu->probability(x));
      dec.stats[c].mass = deterministic_sum(p);
    }
  }
  return dec;
}

ShatterReport verify_decomposition(const ClusterDecomposition& dec, const RegularSet& parts,
                                   const GibbsEnsemble& mu, const ShatterParams& params) {
  const int n = dec.n;
  ShatterReport rep;
  rep.n = n;
  rep.beta = params.beta;
  rep.eps = params.eps;
  rep.r = params.band.r;
  rep.R = params.band.R;
  rep.full_separation = params.full_separation();
  rep.num_clusters = dec.clusters.size();
  rep.regular_size = dec.regular.size();
  rep.shell_pairs = dec.shell_pairs;
  rep.dichotomy_violations = dec.dichotomy_violations;
  rep.representatives = dec.representatives;

  rep.clusters = dec.stats;
  std::vector<double> masses(rep.clusters.size());
  for (std::size_t c = 0; c < rep.clusters.size(); ++c) {
    std::vector<double> p;
    for (Config x : dec.clusters[c]) p.push_back(mu.probability(x));
    rep.clusters[c].mass = masses[c] = deterministic_sum(p);
  }

  // Partition: disjoint clusters whose union is the regular set.
  ConfigSet seen(n);
  std::size_t total = 0;
  for (const auto& cluster : dec.clusters) {
    for (Config x : cluster) {
      if (seen.contains(x) || !dec.regular.contains(x)) rep.partition_ok = false;
      seen.insert(x);
      ++total;
    }
  }
  if (total != rep.regular_size) rep.partition_ok = false;

  if (!dec.clusters.empty()) {
    double diam = 0.0;
    for (const auto& s : dec.stats) diam = std::max(diam, s.diameter);
    rep.max_diameter = diam;
    rep.diameter_ok = diam * n <= params.band.r * n + kTol;
    rep.max_mass = *std::max_element(masses.begin(), masses.end());
    if (rep.max_mass > 0.0) rep.log_max_mass_rate = std::log(rep.max_mass) / n;
  }

  if (rep.full_separation) {
    if (dec.has_separation) {
      rep.min_separation = dec.min_separation;
      rep.separation_ok = dec.min_separation * n > params.band.R * n + kTol;
    }
  } else if (dec.clusters.size() > 1) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double w : masses) {
      sum += w;
      sum_sq += w * w;
    }
    double close = 0.0;
    for (auto [a, b] : dec.close_cluster_pairs) close += masses[a] * masses[b];
    const double all = 0.5 * (sum * sum - sum_sq);
    rep.close_pair_weight = all > 0.0 ? close / all : 0.0;
  }

  rep.coverage = mu.mass(dec.regular);
  rep.band_failure_mass = 1.0 - mu.mass(parts.in_band);
  rep.shell_failure_mass = mu.mass(parts.shell_failure);
  rep.shell_failure_in_band_mass =
      mu.mass([&](Config x) { return parts.in_band.contains(x) && parts.shell_failure.contains(x); });
  rep.union_bound_total = rep.coverage + rep.band_failure_mass + rep.shell_failure_mass;
  return rep;
}

double entropy_mass_bound(double two_r, double beta, double eps, double eps_prime) {
  const double b2 = beta * beta;
  const double t = (1.0 - (1.0 - eps_prime) * (1.0 - eps_prime) * (1.0 + eps)) * std::numbers::ln2 / 2.0;
  return binary_entropy(two_r) + (1.0 + eps / 2.0) * b2 - b2 / 2.0 - std::numbers::ln2 + t;
}

ShatterResult shatter(const EnergyTable& table, const ShatterParams& params, std::size_t cap) {
  ShatterResult res;
  res.parts = regular_set(table, params);
  const GibbsEnsemble mu(table, params.beta);
  res.decomposition = build_clusters(res.parts.members, params.band, &mu, cap);
  res.report = verify_decomposition(res.decomposition, res.parts, mu, params);
  return res;
}

}  // namespace pspin
