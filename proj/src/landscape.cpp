#include "pspin/landscape.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

#include "pspin/rng.hpp"
#include "pspin/special.hpp"

namespace pspin {
namespace {

constexpr std::uint64_t kGibbsStream = 0x47494242ull;  // "GIBB"
constexpr char kTableMagic[8] = {'P', 'S', 'P', 'N', 'T', 'A', 'B', '1'};
constexpr std::size_t kReduceBlock = 4096;
constexpr double kGridTol = 1e-9;

template <typename T>
void put(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
    throw ValidationError("truncated table file");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

// sum_x exp(beta E_x - shift) with fixed block boundaries.
double blocked_exp_sum(std::span<const double> energies, double beta, double shift) {
  const std::size_t blocks = (energies.size() + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t end = std::min(energies.size(), begin + kReduceBlock);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += std::exp(beta * energies[i] - shift);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace

ConfigSet::ConfigSet(int n) : n_(n) {
  check_enumeration_size(n, 40);
  words_.assign(std::max<std::size_t>(1, (std::size_t{1} << n) / 64), 0);
}

std::size_t ConfigSet::size() const noexcept {
  std::size_t total = 0;
  for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

std::vector<Config> ConfigSet::members() const {
  std::vector<Config> out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    for (std::uint64_t bits = words_[w]; bits != 0; bits &= bits - 1) {
      out.push_back((Config{w} << 6) | static_cast<Config>(std::countr_zero(bits)));
    }
  }
  return out;
}

EnergyTable::EnergyTable(int n, std::vector<double> energies, MixtureSpec spec, std::uint64_t seed,
                         DisorderKind kind)
    : n_(n), energies_(std::move(energies)), spec_(std::move(spec)), seed_(seed), kind_(kind) {
  if (energies_.size() != (std::size_t{1} << n_)) {
    throw ValidationError("energy table must hold exactly 2^N entries");
  }
}

Config EnergyTable::argmax() const {
  return static_cast<Config>(std::max_element(energies_.begin(), energies_.end()) - energies_.begin());
}

void check_enumeration_size(int n, int cap) {
  if (n < 1) throw ValidationError("N must be >= 1");
  if (n > cap) {
    throw ResourceError("N = " + std::to_string(n) + " exceeds the enumeration cap of " +
                        std::to_string(cap));
  }
}

EnergyTable enumerate(const MultilinearHamiltonian& H, const DisorderTensor& provenance, int cap) {
  const int n = H.n();
  check_enumeration_size(n, cap);
  const std::size_t total = std::size_t{1} << n;
  const int block_bits = std::min(n, kEnumerationBlockBits);
  const std::size_t block = std::size_t{1} << block_bits;
  const auto blocks = static_cast<std::int64_t>(total / block);
  std::vector<double> out(total);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::size_t t0 = static_cast<std::size_t>(b) * block;
    Config x = t0 ^ (t0 >> 1);
    double e = H.energy(x);
    out[x] = e;
    for (std::size_t t = t0 + 1; t < t0 + block; ++t) {
      const int i = std::countr_zero(t);
      e += H.flip_delta(x, i);
      x ^= Config{1} << i;
      out[x] = e;
    }
  }
  return EnergyTable(n, std::move(out), provenance.spec(), provenance.seed(), provenance.kind());
}

EnergyTable enumerate(const DisorderTensor& G, int cap) {
  check_enumeration_size(G.n(), cap);
  return enumerate(MultilinearHamiltonian(G), G, cap);
}

EnergyTable enumerate_reference(const DisorderTensor& G, int cap) {
  const int n = G.n();
  check_enumeration_size(n, cap);
  std::vector<double> out(std::size_t{1} << n);
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = energy(G, static_cast<Config>(x));
  return EnergyTable(n, std::move(out), G.spec(), G.seed(), G.kind());
}

double log_partition(const EnergyTable& table, double beta) {
  if (!(beta >= 0.0)) throw ValidationError("beta must be >= 0");
  const auto e = table.energies();
  const double top = beta * *std::max_element(e.begin(), e.end());
  return top + std::log(blocked_exp_sum(e, beta, top));
}

GibbsEnsemble::GibbsEnsemble(const EnergyTable& table, double beta)
    : table_(&table), beta_(beta), log_z_(log_partition(table, beta)) {
  const auto e = table.energies();
  probs_.resize(e.size());
  cdf_.resize(e.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < static_cast<std::int64_t>(e.size()); ++x) {
    const auto u = static_cast<std::size_t>(x);
    probs_[u] = std::exp(beta_ * e[u] - log_z_);
  }
  double running = 0.0;
  for (std::size_t x = 0; x < e.size(); ++x) {
    running += probs_[x];
    cdf_[x] = running;
  }
}

double GibbsEnsemble::probability(Config x) const noexcept { return probs_[x]; }

Config GibbsEnsemble::sample_one(std::uint64_t seed, std::uint64_t index) const {
  const double u = to_unit_interval(random_bits(seed, kGibbsStream, index)) * cdf_.back();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  const auto x = static_cast<std::size_t>(it - cdf_.begin());
  return static_cast<Config>(std::min(x, cdf_.size() - 1));
}

std::vector<Config> GibbsEnsemble::sample(std::size_t count, std::uint64_t seed) const {
  std::vector<Config> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = sample_one(seed, i);
  return out;
}

double GibbsEnsemble::mass(const ConfigSet& set) const {
  return mass([&set](Config x) { return set.contains(x); });
}

double GibbsEnsemble::mass(const std::function<bool(Config)>& pred) const {
  std::vector<double> picked(probs_.size(), 0.0);
  for (std::size_t x = 0; x < probs_.size(); ++x) {
    if (pred(static_cast<Config>(x))) picked[x] = probs_[x];
  }
  return deterministic_sum(picked);
}

ConfigSet superlevel(const EnergyTable& table, double beta_level, double xi1) {
  ConfigSet set(table.n());
  const double threshold = beta_level * xi1 * table.n();
  const auto e = table.energies();
  for (std::size_t x = 0; x < e.size(); ++x) {
    if (e[x] >= threshold) set.insert(static_cast<Config>(x));
  }
  return set;
}

double energy_band_mass(const GibbsEnsemble& ensemble, double eps) {
  if (!(eps > 0.0)) throw ValidationError("eps must be > 0");
  if (!(ensemble.beta() > 0.0)) throw ValidationError("energy band needs beta > 0");
  if (std::isinf(eps)) return 1.0;
  const auto& table = ensemble.table();
  const double scale = table.n() * table.spec().xi(1.0) * ensemble.beta();
  return ensemble.mass([&](Config x) { return std::abs(table[x] / scale - 1.0) <= eps; });
}

DistanceRange distance_range(int n, double q_low, double q_high, bool closed) {
  DistanceRange range{n + 1, -1};
  for (int d = 0; d <= n; ++d) {
    const double o = n - 2.0 * d;
    const bool inside = closed ? (o >= n * q_low - kGridTol && o <= n * q_high + kGridTol)
                               : (o > n * q_low + kGridTol && o < n * q_high - kGridTol);
    if (inside) {
      range.lo = std::min(range.lo, d);
      range.hi = std::max(range.hi, d);
    }
  }
  if (range.hi < 0) return {0, -1};
  return range;
}

DistanceRange distance_range_normalized(int n, double r, double R) {
  DistanceRange range{n + 1, -1};
  for (int d = 0; d <= n; ++d) {
    if (d >= n * r - kGridTol && d <= n * R + kGridTol) {
      range.lo = std::min(range.lo, d);
      range.hi = std::max(range.hi, d);
    }
  }
  if (range.hi < 0) return {0, -1};
  return range;
}

void for_each_mask_with_popcount(int n, int d, const std::function<void(Config)>& f) {
  if (n >= 64) throw ValidationError("mask enumeration needs N < 64");
  if (d < 0 || d > n) return;
  if (d == 0) {
    f(0);
    return;
  }
  const Config limit = Config{1} << n;
  Config m = (Config{1} << d) - 1;
  while (m < limit) {
    f(m);
    // Gosper's hack: next larger integer with the same popcount.
    const Config c = m & (~m + 1);
    const Config r = m + c;
    m = (((r ^ m) >> 2) / c) | r;
  }
}

int nearest_slice_distance(int n, double q, bool* adjusted) {
  const double exact = 0.5 * n * (1.0 - q);
  const int d = std::clamp(static_cast<int>(std::lround(exact)), 0, n);
  if (adjusted) *adjusted = std::abs(exact - d) > kGridTol;
  return d;
}

SliceMax slice_max(const EnergyTable& table, Config ref, double q, SliceRoute route) {
  const int n = table.n();
  SliceMax out;
  out.q_requested = q;
  out.distance = nearest_slice_distance(n, q, &out.adjusted);
  out.q_used = 1.0 - 2.0 * out.distance / n;
  if (route == SliceRoute::automatic) {
    route = binomial(n, out.distance) < std::ldexp(1.0, n) / 4.0 ? SliceRoute::subsets
                                                                 : SliceRoute::filter;
  }
  out.route = route;
  double best = -std::numeric_limits<double>::infinity();
  Config best_x = ref;
  if (route == SliceRoute::subsets) {
    for_each_mask_with_popcount(n, out.distance, [&](Config mask) {
      const Config x = ref ^ mask;
      if (table[x] > best) {
        best = table[x];
        best_x = x;
      }
    });
  } else {
    for (std::size_t x = 0; x < table.size(); ++x) {
      if (hamming(static_cast<Config>(x), ref) == out.distance && table[x] > best) {
        best = table[x];
        best_x = static_cast<Config>(x);
      }
    }
  }
  out.max_energy_per_site = best / n;
  out.argmax = best_x;
  return out;
}

SliceMax slice_max(const MultilinearHamiltonian& H, Config ref, double q) {
  const int n = H.n();
  SliceMax out;
  out.q_requested = q;
  out.distance = nearest_slice_distance(n, q, &out.adjusted);
  out.q_used = 1.0 - 2.0 * out.distance / n;
  out.route = SliceRoute::subsets;
  double best = -std::numeric_limits<double>::infinity();
  Config best_x = ref;
  for_each_mask_with_popcount(n, out.distance, [&](Config mask) {
    const Config x = ref ^ mask;
    const double e = H.energy(x);
    if (e > best) {
      best = e;
      best_x = x;
    }
  });
  out.max_energy_per_site = best / n;
  out.argmax = best_x;
  return out;
}

double log_likelihood_ratio(const EnergyTable& table, double beta) {
  const int n = table.n();
  return log_partition(table, beta) - n * std::numbers::ln2 -
         0.5 * beta * beta * n * table.spec().xi(1.0);
}

std::uint64_t mixture_hash(const MixtureSpec& spec) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : spec.to_string()) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

void write_table(std::ostream& out, const EnergyTable& table) {
  out.write(kTableMagic, sizeof kTableMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(table.n()));
  put<std::uint64_t>(out, mixture_hash(table.spec()));
  put<std::uint64_t>(out, table.seed());
  for (double e : table.energies()) put<double>(out, e);
  if (!out) throw Error("failed to write energy table");
}

EnergyTable read_table(std::istream& in, const MixtureSpec& spec, TableHeader* header) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kTableMagic, sizeof magic) != 0) {
    throw ValidationError("not an energy table (bad magic)");
  }
  TableHeader h;
  h.n = static_cast<int>(get<std::uint32_t>(in));
  h.spec_hash = get<std::uint64_t>(in);
  h.seed = get<std::uint64_t>(in);
  check_enumeration_size(h.n, 40);
  if (h.spec_hash != mixture_hash(spec)) throw ValidationError("table was built for another mixture");
  std::vector<double> e(std::size_t{1} << h.n);
  for (auto& v : e) v = get<double>(in);
  if (header) *header = h;
  return EnergyTable(h.n, std::move(e), spec, h.seed, DisorderKind::null);
}

}  // namespace pspin
