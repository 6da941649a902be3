#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace pspin {

// Philox4x32-10 (Salmon et al., SC'11). A counter-based generator: the output
// block is a pure function of (key, counter), so any coupling or replica can be
// regenerated without replaying a stream.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter block(Counter ctr, Key key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

/// SplitMix64 finalizer; used only to derive child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Child seed for (seed, a, b). Derivation is positional: replica r of a run
/// with more replicas sees the same seed as replica r of a shorter run.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
  return mix64(mix64(seed ^ mix64(a + 0x632BE59BD9B4E019ull)) ^ mix64(b + 0x8CB92BA72F3D8DD7ull));
}

/// 64 random bits at (seed, stream, index).
inline std::uint64_t random_bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  const auto out = Philox4x32::block(ctr, key);
  return (std::uint64_t{out[0]} << 32) | out[1];
}

/// Uniform on (0, 1]; never returns 0 so log() is safe.
inline double to_unit_interval(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal at (seed, stream, index). Pairs of indices share one
/// Philox block through the two Box-Muller outputs.
inline double normal_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const std::uint64_t pair = index >> 1;
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(pair >> 32),
                                static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  const auto out = Philox4x32::block(ctr, key);
  const double u1 = to_unit_interval((std::uint64_t{out[0]} << 32) | out[1]);
  const double u2 = to_unit_interval((std::uint64_t{out[2]} << 32) | out[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (index & 1u) ? radius * std::sin(angle) : radius * std::cos(angle);
}

/// Sequential view of one (seed, stream) counter space. Satisfies
/// UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return random_bits(seed_, stream_, counter_++); }

  double uniform() noexcept { return to_unit_interval((*this)()); }

  /// Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t r;
    do {
      r = (*this)();
    } while (r >= limit);
    return r % bound;
  }

  double normal() noexcept { return normal_at(seed_, stream_ ^ kNormalTag, normal_counter_++); }

 private:
  static constexpr std::uint64_t kNormalTag = 0x4E4F524D414C0000ull;
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t normal_counter_ = 0;
};

}  // namespace pspin
