#pragma once

#include <functional>
#include <vector>

namespace pspin {

/// Gauss-Hermite rule for the weight e^{-x^2} on the real line.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes by Newton iteration on the orthonormal recurrence, seeded with the
/// usual asymptotic guesses; n up to a few hundred.
GaussHermiteRule gauss_hermite(int n);

/// The shared 201-node rule.
const GaussHermiteRule& hermite201();

/// E f(mean + Z) for Z ~ N(0, 1) under a Gauss-Hermite rule.
double gaussian_expectation(const GaussHermiteRule& rule, double mean,
                            const std::function<double(double)>& f);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
};

/// Adaptive Simpson on [a, b] with Richardson correction.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double tol, int max_depth = 60);

struct Minimum {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section search for a minimum of a unimodal f on [a, b], down to
/// bracket width `width`.
Minimum golden_section(const std::function<double(double)>& f, double a, double b, double width);

/// Bisection for the boundary of a predicate that is false at lo and true at
/// hi; returns the final (lo, hi) bracket.
struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};
Bracket bisect_predicate(const std::function<bool(double)>& pred, double lo, double hi, double tol,
                         int max_iter = 200);

}  // namespace pspin
