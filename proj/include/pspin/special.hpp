#pragma once

namespace pspin {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal distribution function.
double normal_cdf(double x);

/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

/// Phi^{-1}(1 - s/2) for s in (0, 2), accurate as s -> 0.
double normal_upper_half_quantile(double s);

/// Binary entropy h(s) = -s log s - (1 - s) log(1 - s), with h(0) = h(1) = 0.
double binary_entropy(double s);

/// Binomial coefficient as a double (exact below 2^53).
double binomial(int n, int k);

}  // namespace pspin
