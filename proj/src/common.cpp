#include "pspin/common.hpp"

#include <algorithm>

namespace pspin {

Config pack_spins(std::span<const int> spins) {
  if (spins.size() > static_cast<std::size_t>(kMaxPackedSites)) {
    throw ValidationError("bit-packed configurations support at most 64 sites");
  }
  Config x = 0;
  for (std::size_t i = 0; i < spins.size(); ++i) {
    if (spins[i] != 1 && spins[i] != -1) {
      throw ValidationError("spin values must be +1 or -1");
    }
    if (spins[i] < 0) x |= Config{1} << i;
  }
  return x;
}

std::vector<int> unpack_spins(Config x, int n) {
  std::vector<int> spins(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) spins[static_cast<std::size_t>(i)] = spin(x, i);
  return spins;
}

double deterministic_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 4096;
  double total = 0.0;
  for (std::size_t begin = 0; begin < values.size(); begin += kBlock) {
    const std::size_t end = std::min(values.size(), begin + kBlock);
    double partial = 0.0;
    for (std::size_t i = begin; i < end; ++i) partial += values[i];
    total += partial;
  }
  return total;
}

}  // namespace pspin
