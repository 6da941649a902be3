#pragma once

#include <map>
#include <optional>
#include <string>

#include "pspin/mixture.hpp"

namespace pspin {

enum class ThresholdName {
  beta_d,
  bar_beta_d,
  bar_beta_d_sph,
  beta_d_sph,
  beta_c_bounds,
  e_alg,
  large_p_limit,
  constant_C,
};

std::string to_string(ThresholdName name);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const noexcept { return hi - lo; }
};

/// One computed threshold together with the solver settings that produced it.
struct ThresholdReport {
  ThresholdName name = ThresholdName::beta_d;
  double value = 0.0;
  std::optional<Interval> interval;
  std::optional<double> minimizer;
  std::string minimizer_kind;  // "q", "lambda" or empty
  std::optional<MixtureSpec> spec;
  std::map<std::string, double> settings;
};

/// Overlap window of the soft overlap gap property and the radii used by the
/// shattering construction: r = (1 - q_high)/2, R = (1 - q_low)/2.
struct OgpBand {
  double q_low = 0.0;
  double q_high = 1.0;
  double eps = 0.0;
  double delta = 0.0;  // 0 for bands not produced by the pure p-spin construction
  double r = 0.0;
  double R = 0.0;
  double rate = 0.1;
  bool feasible = true;
  std::string diagnostic;

  bool full_separation() const noexcept { return r < R / 3.0; }

  static OgpBand from_overlaps(double q_low, double q_high, double eps, double rate = 0.1);
  static OgpBand from_radii(double r, double R, double eps, double rate = 0.1);
};

// ---- replica fixed point --------------------------------------------------

/// F(q; beta) = E[cosh(aZ) tanh^2(aZ)] / E[cosh(aZ)], a = beta sqrt(xi'(q)),
/// evaluated in the tilted form E[tanh^2(aY)], Y ~ N(a, 1).
double replica_fixed_point_map(const MixtureSpec& spec, double beta, double q);

/// Same ratio from the untilted numerator and denominator under one
/// Gauss-Hermite rule. Loses accuracy once a is large; kept as a cross-check.
double replica_fixed_point_map_direct(const MixtureSpec& spec, double beta, double q);

/// True if F(.; beta) - id has a nonzero fixed point in (0, 1] on the q-grid
/// (tangencies refined by golden section count as roots).
bool has_nontrivial_fixed_point(const MixtureSpec& spec, double beta, double q_step = 1e-4);

/// Dynamical threshold beta_d by bisection; minimizer is the largest fixed
/// point at beta_d + tol.
ThresholdReport beta_d(const MixtureSpec& spec, double tol = 1e-8);

// ---- soft-OGP temperatures -------------------------------------------------

/// 2 sqrt(xi'(1)) phi(Phi^{-1}((1+q)/2)) / (xi(1) - xi(q)), parameterized by
/// s = 1 - q for accuracy near q = 1.
double bar_beta_d_objective(const MixtureSpec& spec, double s);

/// sqrt(xi'(1)(1 - q^2)) / (xi(1) - xi(q)), again in s = 1 - q.
double bar_beta_d_spherical_objective(const MixtureSpec& spec, double s);

ThresholdReport bar_beta_d(const MixtureSpec& spec);
ThresholdReport bar_beta_d_spherical(const MixtureSpec& spec);

struct LargePConstants {
  double limit_value = 0.0;  // inf_lambda sqrt(2 lambda)/(1 - e^{-lambda})
  double lambda_star = 0.0;
  double C = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// g(lambda) = sqrt(2 lambda) / (1 - e^{-lambda}).
double spherical_large_p_profile(double lambda);

LargePConstants large_p_constants();

/// sqrt((p-1)^{p-1} / (p (p-2)^{p-2})), evaluated in log space.
double beta_d_spherical(int p);

/// (1 - 2^{-p}) sqrt(2 log 2) <= beta_c <= sqrt(2 log 2).
Interval beta_c_bounds(int p);

enum class BetaCheck { below, uncertain, above };

/// Classifies beta against beta_c_bounds(p): `above` is a rejection,
/// `uncertain` a warning.
BetaCheck check_beta_below_critical(int p, double beta);

/// E_ALG = int_0^1 sqrt(xi''(x)) dx by adaptive quadrature after x = t^2.
double e_alg(const MixtureSpec& spec, double quad_tol = 1e-10);

// ---- Lagrangian dual of the slice maximum -----------------------------------

struct DualMinimum {
  double h_star = 0.0;
  double min_value = 0.0;
};

/// u(h) - h q with u(h) = E|g + h| = h(2 Phi(h) - 1) + 2 phi(h).
double u_dual_objective(double h, double q);

/// Analytic minimizer h* = Phi^{-1}((1+q)/2) and minimum 2 phi(h*).
DualMinimum u_dual(double q);

// ---- OGP band ----------------------------------------------------------------

/// v(lambda) = lambda / (1 - e^{-lambda}), v(0) = 1.
double v_ratio(double lambda);

/// Pure p-spin band for a given eps'. Reports infeasibility through
/// OgpBand::feasible rather than throwing.
OgpBand ogp_band_pure_p(int p, double eps_prime, double rate = 0.1);

/// Largest violation-free slack of the strict inequality
/// 2 sqrt(xi'(1)) phi(Phi^{-1}((1+q)/2)) < (1 - eps) beta xi(1) - beta xi(q)
/// over q in [q_low, q_high]: returns min_q of the right side minus the left
/// side at eps = 0, divided by beta xi(1).
double ogp_condition_slack(const MixtureSpec& spec, double beta, double q_low, double q_high,
                           int samples = 1000);

}  // namespace pspin
