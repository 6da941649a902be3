#include "pspin/disorder.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "pspin/rng.hpp"

namespace pspin {
namespace {

constexpr std::uint64_t kPlantStream = 0x504C414E54ull;  // "PLANT"
constexpr char kDisorderMagic[8] = {'P', 'S', 'P', 'N', 'D', 'I', 'S', '1'};
constexpr std::uint32_t kDisorderVersion = 1;

std::uint64_t checked_pow(int n, int k, std::uint64_t cap) {
  std::uint64_t v = 1;
  for (int j = 0; j < k; ++j) {
    if (v > cap / static_cast<std::uint64_t>(n)) {
      throw ResourceError("coupling array N^" + std::to_string(k) + " = " + std::to_string(n) + "^" +
                          std::to_string(k) + " exceeds the cap of " + std::to_string(cap));
    }
    v *= static_cast<std::uint64_t>(n);
  }
  return v;
}

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
    throw ValidationError("truncated disorder file");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

std::vector<int> as_spins(Config x, int n) {
  if (n > kMaxPackedSites) throw ValidationError("packed configuration needs n <= 64");
  return unpack_spins(x, n);
}

void check_spins(const DisorderTensor& G, std::span<const int> sigma) {
  if (sigma.size() != static_cast<std::size_t>(G.n())) {
    throw ValidationError("configuration length does not match N");
  }
}

}  // namespace

const char* to_string(DisorderKind kind) {
  switch (kind) {
    case DisorderKind::null: return "null";
    case DisorderKind::planted: return "planted";
    case DisorderKind::interpolated: return "interpolated";
  }
  return "unknown";
}

std::uint64_t checked_coupling_count(int n, const MixtureSpec& spec, std::uint64_t cap) {
  if (n < 1) throw ValidationError("N must be >= 1");
  std::uint64_t total = 0;
  for (const auto& t : spec.terms()) {
    total += checked_pow(n, t.degree, cap);
    if (total > cap) {
      throw ResourceError("total coupling count " + std::to_string(total) + " exceeds the cap of " +
                          std::to_string(cap));
    }
  }
  return total;
}

DisorderTensor::DisorderTensor(int n, MixtureSpec spec, std::vector<std::vector<double>> couplings,
                               std::uint64_t seed, DisorderKind kind)
    : n_(n), spec_(std::move(spec)), couplings_(std::move(couplings)), seed_(seed), kind_(kind) {
  if (n_ < 1) throw ValidationError("N must be >= 1");
  if (couplings_.size() != spec_.terms().size()) {
    throw ValidationError("one coupling array per mixture degree is required");
  }
  for (std::size_t t = 0; t < couplings_.size(); ++t) {
    const auto expected = checked_pow(n_, spec_.terms()[t].degree, ~std::uint64_t{0});
    if (couplings_[t].size() != expected) {
      throw ValidationError("coupling array for degree " + std::to_string(spec_.terms()[t].degree) +
                            " must have N^k entries");
    }
  }
}

DisorderTensor DisorderTensor::zeros(int n, const MixtureSpec& spec) {
  checked_coupling_count(n, spec);
  std::vector<std::vector<double>> c;
  for (const auto& t : spec.terms()) c.emplace_back(checked_pow(n, t.degree, ~std::uint64_t{0}), 0.0);
  return DisorderTensor(n, spec, std::move(c), 0, DisorderKind::null);
}

std::size_t DisorderTensor::coupling_count() const noexcept {
  std::size_t total = 0;
  for (const auto& c : couplings_) total += c.size();
  return total;
}

double DisorderTensor::term_scale(std::size_t term) const {
  const auto& t = spec_.terms().at(term);
  return t.gamma * std::pow(static_cast<double>(n_), -0.5 * (t.degree - 1));
}

DisorderTensor sample_null(int n, const MixtureSpec& spec, std::uint64_t seed, std::uint64_t cap) {
  checked_coupling_count(n, spec, cap);
  std::vector<std::vector<double>> c;
  for (const auto& t : spec.terms()) {
    std::vector<double> values(checked_pow(n, t.degree, cap));
    const auto stream = static_cast<std::uint64_t>(t.degree);
    const auto count = static_cast<std::int64_t>(values.size());
#pragma omp parallel for schedule(static) if (count > 65536)
    for (std::int64_t j = 0; j < count; ++j) {
      values[static_cast<std::size_t>(j)] = normal_at(seed, stream, static_cast<std::uint64_t>(j));
    }
    c.push_back(std::move(values));
  }
  return DisorderTensor(n, spec, std::move(c), seed, DisorderKind::null);
}

PlantedInstance sample_planted(int n, const MixtureSpec& spec, double beta, std::uint64_t seed,
                               std::uint64_t cap) {
  if (!(beta >= 0.0)) throw ValidationError("beta must be >= 0");
  if (n > kMaxPackedSites) throw ValidationError("planted instances need N <= 64");
  DisorderTensor tilde = sample_null(n, spec, seed, cap);
  const Config sigma_star = random_bits(seed, kPlantStream, 0) & full_mask(n);
  const auto spins = unpack_spins(sigma_star, n);

  std::vector<std::vector<double>> shifted;
  for (std::size_t t = 0; t < tilde.term_count(); ++t) {
    const int k = spec.terms()[t].degree;
    const double shift = beta * tilde.term_scale(t);
    auto src = tilde.couplings(t);
    std::vector<double> values(src.begin(), src.end());
    const auto count = static_cast<std::int64_t>(values.size());
#pragma omp parallel for schedule(static) if (count > 65536)
    for (std::int64_t j = 0; j < count; ++j) {
      auto rest = static_cast<std::uint64_t>(j);
      int sign = 1;
      for (int m = 0; m < k; ++m) {
        sign *= spins[rest % static_cast<std::uint64_t>(n)];
        rest /= static_cast<std::uint64_t>(n);
      }
      values[static_cast<std::size_t>(j)] += shift * sign;
    }
    shifted.push_back(std::move(values));
  }
  DisorderTensor G(n, spec, std::move(shifted), seed, DisorderKind::planted);
  return {sigma_star, std::move(G), std::move(tilde), beta};
}

DisorderTensor interpolate(const DisorderTensor& G, const DisorderTensor& G_prime, double tau) {
  if (G.n() != G_prime.n() || !(G.spec() == G_prime.spec())) {
    throw IncompatibleError("interpolate: tensors differ in N or mixture");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in [0, 1]");
  const double a = 1.0 - tau;
  const double b = std::sqrt(2.0 * tau - tau * tau);
  std::vector<std::vector<double>> c;
  for (std::size_t t = 0; t < G.term_count(); ++t) {
    auto x = G.couplings(t);
    auto y = G_prime.couplings(t);
    std::vector<double> values(x.size());
    const auto count = static_cast<std::int64_t>(values.size());
#pragma omp parallel for schedule(static) if (count > 65536)
    for (std::int64_t j = 0; j < count; ++j) {
      const auto u = static_cast<std::size_t>(j);
      values[u] = a * x[u] + b * y[u];
    }
    c.push_back(std::move(values));
  }
  return DisorderTensor(G.n(), G.spec(), std::move(c), G.seed(), DisorderKind::interpolated);
}

double energy(const DisorderTensor& G, std::span<const int> sigma) {
  check_spins(G, sigma);
  const auto n = static_cast<std::size_t>(G.n());
  double total = 0.0;
  std::vector<double> buffer;
  for (std::size_t t = 0; t < G.term_count(); ++t) {
    auto c = G.couplings(t);
    buffer.assign(c.begin(), c.end());
    // Contract the last (least significant) index until a scalar remains.
    std::size_t size = buffer.size();
    while (size > 1) {
      const std::size_t next = size / n;
      for (std::size_t m = 0; m < next; ++m) {
        double acc = 0.0;
        const double* row = buffer.data() + m * n;
        for (std::size_t i = 0; i < n; ++i) acc += row[i] * sigma[i];
        buffer[m] = acc;
      }
      size = next;
    }
    total += G.term_scale(t) * buffer[0];
  }
  return total;
}

double energy(const DisorderTensor& G, Config sigma) {
  const auto spins = as_spins(sigma, G.n());
  return energy(G, spins);
}

double flip_delta(const DisorderTensor& G, std::span<const int> sigma, int i) {
  check_spins(G, sigma);
  const int n = G.n();
  if (i < 0 || i >= n) throw ValidationError("flip site out of range");
  double delta = 0.0;
  std::vector<int> digits;
  for (std::size_t t = 0; t < G.term_count(); ++t) {
    const int k = G.spec().terms()[t].degree;
    auto c = G.couplings(t);
    double term_sum = 0.0;
    // Each tuple containing i is visited once, keyed by the first position m
    // holding i: positions before m avoid i, position m is i, the rest are free.
    for (int m = 0; m < k; ++m) {
      digits.assign(static_cast<std::size_t>(k), 0);
      digits[static_cast<std::size_t>(m)] = i;
      for (int pos = 0; pos < m; ++pos) digits[static_cast<std::size_t>(pos)] = (i == 0) ? 1 : 0;
      if (m > 0 && n == 1) continue;  // no index differs from i
      while (true) {
        std::size_t index = 0;
        int multiplicity = 0;
        int sign = 1;
        for (int pos = 0; pos < k; ++pos) {
          const int d = digits[static_cast<std::size_t>(pos)];
          index = index * static_cast<std::size_t>(n) + static_cast<std::size_t>(d);
          multiplicity += (d == i);
          sign *= sigma[static_cast<std::size_t>(d)];
        }
        if (multiplicity % 2 == 1) term_sum += c[index] * sign;
        // Odometer over the free positions, least significant last.
        int pos = k - 1;
        for (; pos >= 0; --pos) {
          if (pos == m) continue;
          auto& d = digits[static_cast<std::size_t>(pos)];
          int next = d + 1;
          if (pos < m && next == i) ++next;
          if (next < n) {
            d = next;
            break;
          }
          d = (pos < m && i == 0) ? 1 : 0;
        }
        if (pos < 0) break;
      }
    }
    delta += -2.0 * G.term_scale(t) * term_sum;
  }
  return delta;
}

double flip_delta(const DisorderTensor& G, Config sigma, int i) {
  const auto spins = as_spins(sigma, G.n());
  return flip_delta(G, spins, i);
}

void write_disorder(std::ostream& out, const DisorderTensor& G) {
  out.write(kDisorderMagic, sizeof kDisorderMagic);
  put<std::uint32_t>(out, kDisorderVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(G.n()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(G.term_count()));
  for (const auto& t : G.spec().terms()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.degree));
    put<double>(out, t.gamma);
  }
  put<std::uint64_t>(out, G.seed());
  put<std::uint8_t>(out, static_cast<std::uint8_t>(G.kind()));
  for (std::size_t t = 0; t < G.term_count(); ++t) {
    for (double v : G.couplings(t)) put<double>(out, v);
  }
  if (!out) throw Error("failed to write disorder dump");
}

DisorderTensor read_disorder(std::istream& in, std::uint64_t cap) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kDisorderMagic, sizeof magic) != 0) {
    throw ValidationError("not a disorder dump (bad magic)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kDisorderVersion) throw ValidationError("unsupported disorder dump version");
  const auto n = static_cast<int>(get<std::uint32_t>(in));
  const auto degrees = get<std::uint32_t>(in);
  std::vector<MixtureTerm> terms;
  for (std::uint32_t d = 0; d < degrees; ++d) {
    const auto k = static_cast<int>(get<std::uint32_t>(in));
    terms.push_back({k, get<double>(in)});
  }
  MixtureSpec spec(std::move(terms));
  const auto seed = get<std::uint64_t>(in);
  const auto kind_byte = get<std::uint8_t>(in);
  if (kind_byte > 2) throw ValidationError("bad disorder kind in dump");
  checked_coupling_count(n, spec, cap);
  std::vector<std::vector<double>> c;
  for (const auto& t : spec.terms()) {
    std::vector<double> values(checked_pow(n, t.degree, cap));
    for (auto& v : values) v = get<double>(in);
    c.push_back(std::move(values));
  }
  return DisorderTensor(n, spec, std::move(c), seed, static_cast<DisorderKind>(kind_byte));
}

MultilinearHamiltonian::MultilinearHamiltonian(const DisorderTensor& G)
    : n_(G.n()), site_terms_(static_cast<std::size_t>(G.n())) {
  if (n_ > kMaxPackedSites) throw ValidationError("multilinear form needs N <= 64");
  const auto n = static_cast<std::size_t>(n_);
  std::unordered_map<Config, double> acc;
  for (std::size_t t = 0; t < G.term_count(); ++t) {
    const int k = G.spec().terms()[t].degree;
    const double scale = G.term_scale(t);
    auto c = G.couplings(t);
    std::vector<std::size_t> digits(static_cast<std::size_t>(k), 0);
    for (std::size_t j = 0; j < c.size(); ++j) {
      Config mask = 0;
      for (auto d : digits) mask ^= Config{1} << d;
      acc[mask] += scale * c[j];
      for (int pos = k - 1; pos >= 0; --pos) {
        auto& d = digits[static_cast<std::size_t>(pos)];
        if (++d < n) break;
        d = 0;
      }
    }
  }
  for (const auto& [mask, coef] : acc) {
    if (mask == 0) {
      constant_ = coef;
    } else if (coef != 0.0) {
      terms_.push_back({mask, coef});
    }
  }
  std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.mask < b.mask; });
  for (const auto& term : terms_) {
    for (Config rest = term.mask; rest != 0; rest &= rest - 1) {
      const int i = std::countr_zero(rest);
      site_terms_[static_cast<std::size_t>(i)].push_back({term.mask & ~(Config{1} << i), term.coef});
    }
  }
}

namespace {

// coef * (-1)^popcount(overlap), as a sign-bit flip.
inline double signed_coef(double coef, Config overlap) noexcept {
  const auto odd = static_cast<std::uint64_t>(std::popcount(overlap) & 1);
  return std::bit_cast<double>(std::bit_cast<std::uint64_t>(coef) ^ (odd << 63));
}

}  // namespace

double MultilinearHamiltonian::energy(Config x) const noexcept {
  double total = constant_;
  for (const auto& t : terms_) total += signed_coef(t.coef, t.mask & x);
  return total;
}

double MultilinearHamiltonian::flip_delta(Config x, int i) const noexcept {
  double field = 0.0;
  for (const auto& t : site_terms_[static_cast<std::size_t>(i)]) {
    field += signed_coef(t.coef, t.mask & x);
  }
  return ((x >> i) & 1u) ? 2.0 * field : -2.0 * field;
}

}  // namespace pspin
