#include "pspin/special.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>

#include "pspin/common.hpp"

namespace pspin {

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("normal_quantile needs p in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double normal_upper_half_quantile(double s) {
  if (!(s > 0.0 && s < 2.0)) throw ValidationError("normal_upper_half_quantile needs s in (0, 2)");
  return std::numbers::sqrt2 * boost::math::erfc_inv(s);
}

double binary_entropy(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return -s * std::log(s) - (1.0 - s) * std::log1p(-s);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double result = 1.0;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return std::round(result);
}

}  // namespace pspin
