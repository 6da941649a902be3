#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pspin {

/// Base class for all library errors. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition, domain or bracket failure (bad degree, q outside [0,1), ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Configured size cap exceeded (coupling count, enumeration N, pair scans).
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Numerical routine failed to reach its tolerance; carries the last residual.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Two disorder tensors with different (N, mixture) were combined.
class IncompatibleError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Configurations on {-1,+1}^N with N <= 64 are bit-packed: bit i set means
// sigma_i = -1, so the all-ones configuration is 0.
using Config = std::uint64_t;

inline constexpr int kMaxPackedSites = 64;

inline int spin(Config x, int i) noexcept { return ((x >> i) & 1u) ? -1 : 1; }

inline int hamming(Config a, Config b) noexcept { return std::popcount(a ^ b); }

/// <sigma, sigma'> = N - 2 d_H.
inline int overlap(Config a, Config b, int n) noexcept { return n - 2 * hamming(a, b); }

inline Config full_mask(int n) noexcept {
  return n >= 64 ? ~Config{0} : ((Config{1} << n) - 1);
}

Config pack_spins(std::span<const int> spins);
std::vector<int> unpack_spins(Config x, int n);

/// Fixed-order, block-wise sum used by every reduction that must not depend
/// on the worker count.
double deterministic_sum(std::span<const double> values);

}  // namespace pspin
