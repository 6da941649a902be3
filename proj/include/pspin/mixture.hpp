#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pspin {

struct MixtureTerm {
  int degree = 0;
  double gamma = 0.0;
  friend bool operator==(const MixtureTerm&, const MixtureTerm&) = default;
};

/// Mixture function xi(x) = sum_k gamma_k^2 x^k over degrees k >= 2.
///
/// Stores gamma_k, not gamma_k^2, so a negative gamma_k is accepted and is
/// equivalent to |gamma_k| for every quantity derived from xi. Terms are kept
/// sorted by degree. Immutable after construction.
class MixtureSpec {
 public:
  explicit MixtureSpec(std::vector<MixtureTerm> terms);

  /// The pure p-spin mixture xi(x) = x^p.
  static MixtureSpec pure(int p);

  /// Parses `k:gamma` pairs separated by commas (`2:1.0,3:2.0`) or the
  /// shorthand `pure:p`.
  static MixtureSpec parse(std::string_view text);

  /// xi, xi' or xi'' at x (order in {0, 1, 2}).
  double xi(double x, int order = 0) const;

  /// xi(1) - xi(1 - s), accurate when s is tiny.
  double xi_gap(double s) const;

  const std::vector<MixtureTerm>& terms() const noexcept { return terms_; }
  int max_degree() const noexcept { return terms_.back().degree; }
  bool is_pure() const noexcept { return terms_.size() == 1; }

  /// Canonical text form; round-trips through parse().
  std::string to_string() const;

  friend bool operator==(const MixtureSpec&, const MixtureSpec&) = default;

 private:
  std::vector<MixtureTerm> terms_;
};

}  // namespace pspin
