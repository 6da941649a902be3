#include "pspin/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pspin/common.hpp"
#include "pspin/numerics.hpp"
#include "pspin/special.hpp"

namespace pspin {
namespace {

constexpr double kQStep = 1e-4;
constexpr double kGoldenWidth = 1e-10;
constexpr double kQuadTol = 1e-10;

const GaussHermiteRule& hermite101() {
  static const GaussHermiteRule rule = gauss_hermite(101);
  return rule;
}

double tilted_tanh2(const GaussHermiteRule& rule, double a) {
  return gaussian_expectation(rule, a, [a](double y) {
    const double t = std::tanh(a * y);
    return t * t;
  });
}

// s-grid for infima over q in (0, 1): uniform in q with step kQStep, plus a
// geometric tail toward q = 1 so minimizers at 1 - O(1/p) are bracketed even
// for very large p. Sorted by increasing q (decreasing s).
const std::vector<double>& s_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> s;
    const int uniform = static_cast<int>(std::lround(1.0 / kQStep));
    for (int k = uniform - 1; k >= 1; --k) s.push_back(k * kQStep);
    const int tail = 2000;
    const double lo = std::log(1e-13);
    const double hi = std::log(kQStep);
    for (int k = tail - 1; k >= 0; --k) s.push_back(std::exp(lo + (hi - lo) * k / tail));
    return s;
  }();
  return grid;
}

struct GridMin {
  double s = 0.0;
  double value = 0.0;
};

GridMin minimize_over_q(const std::function<double(double)>& objective) {
  const auto& grid = s_grid();
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = objective(grid[i]);
    if (!std::isfinite(v)) {
      throw ValidationError("objective is not finite at q = " + std::to_string(1.0 - grid[i]));
    }
    if (v < best_value) {  // strict: keeps the smallest minimizing q
      best_value = v;
      best = i;
    }
  }
  const double s_hi = best == 0 ? 1.0 : grid[best - 1];
  const double s_lo = best + 1 < grid.size() ? grid[best + 1] : 0.5 * grid[best];
  const Minimum refined = golden_section(objective, s_lo, s_hi, kGoldenWidth * std::min(1.0, s_hi));
  if (refined.value <= best_value) return {refined.x, refined.value};
  return {grid[best], best_value};
}

void check_q(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("q must lie in [0, 1]");
}

}  // namespace

std::string to_string(ThresholdName name) {
  switch (name) {
    case ThresholdName::beta_d: return "beta_d";
    case ThresholdName::bar_beta_d: return "bar_beta_d";
    case ThresholdName::bar_beta_d_sph: return "bar_beta_d_sph";
    case ThresholdName::beta_d_sph: return "beta_d_sph";
    case ThresholdName::beta_c_bounds: return "beta_c_bounds";
    case ThresholdName::e_alg: return "e_alg";
    case ThresholdName::large_p_limit: return "large_p_limit";
    case ThresholdName::constant_C: return "constant_C";
  }
  return "unknown";
}

OgpBand OgpBand::from_overlaps(double q_low, double q_high, double eps, double rate) {
  if (!(q_low >= -1.0 && q_high <= 1.0 && q_low <= q_high)) {
    throw ValidationError("band needs -1 <= q_low <= q_high <= 1");
  }
  if (!(eps >= 0.0) || !(rate >= 0.0)) throw ValidationError("band eps and rate must be >= 0");
  OgpBand band;
  band.q_low = q_low;
  band.q_high = q_high;
  band.eps = eps;
  band.rate = rate;
  band.r = 0.5 * (1.0 - q_high);
  band.R = 0.5 * (1.0 - q_low);
  band.feasible = q_low < q_high;
  if (!band.feasible) band.diagnostic = "empty overlap window (q_low == q_high)";
  return band;
}

OgpBand OgpBand::from_radii(double r, double R, double eps, double rate) {
  if (!(r >= 0.0 && r < R && R <= 1.0)) throw ValidationError("band radii need 0 <= r < R <= 1");
  OgpBand band = from_overlaps(1.0 - 2.0 * R, 1.0 - 2.0 * r, eps, rate);
  band.r = r;
  band.R = R;
  return band;
}

double replica_fixed_point_map(const MixtureSpec& spec, double beta, double q) {
  if (!(beta >= 0.0)) throw ValidationError("beta must be >= 0");
  check_q(q);
  const double a = beta * std::sqrt(spec.xi(q, 1));
  if (a == 0.0) return 0.0;
  const double primary = tilted_tanh2(hermite201(), a);
  const double residual = std::abs(primary - tilted_tanh2(hermite101(), a));
  if (residual <= kQuadTol) return std::clamp(primary, 0.0, 1.0);
  const auto fallback = adaptive_simpson(
      [a](double y) {
        const double t = std::tanh(a * y);
        return t * t * normal_pdf(y - a);
      },
      a - 40.0, a + 40.0, kQuadTol);
  if (!fallback.converged) {
    throw AccuracyError("replica fixed-point quadrature did not converge", fallback.error_estimate);
  }
  return std::clamp(fallback.value, 0.0, 1.0);
}

double replica_fixed_point_map_direct(const MixtureSpec& spec, double beta, double q) {
  if (!(beta >= 0.0)) throw ValidationError("beta must be >= 0");
  check_q(q);
  const double a = beta * std::sqrt(spec.xi(q, 1));
  if (a == 0.0) return 0.0;
  const auto& rule = hermite201();
  const double num = gaussian_expectation(rule, 0.0, [a](double z) {
    const double t = std::tanh(a * z);
    return std::cosh(a * z) * t * t;
  });
  const double den = gaussian_expectation(rule, 0.0, [a](double z) { return std::cosh(a * z); });
  return num / den;
}

bool has_nontrivial_fixed_point(const MixtureSpec& spec, double beta, double q_step) {
  const int steps = static_cast<int>(std::lround(1.0 / q_step));
  double best_gap = -std::numeric_limits<double>::infinity();
  int best_k = 1;
  for (int k = 1; k <= steps; ++k) {
    const double q = std::min(1.0, k * q_step);
    const double gap = replica_fixed_point_map(spec, beta, q) - q;
    if (gap >= 0.0) return true;
    if (gap > best_gap) {
      best_gap = gap;
      best_k = k;
    }
  }
  const double lo = std::max(q_step * 1e-3, (best_k - 1) * q_step);
  const double hi = std::min(1.0, (best_k + 1) * q_step);
  const auto refined = golden_section(
      [&](double q) { return q - replica_fixed_point_map(spec, beta, q); }, lo, hi, 1e-12);
  return refined.value <= 0.0;
}

ThresholdReport beta_d(const MixtureSpec& spec, double tol) {
  if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
  const double upper = 2.0 * std::sqrt(2.0 * std::numbers::ln2);
  const auto pred = [&](double beta) { return has_nontrivial_fixed_point(spec, beta); };
  const Bracket br = bisect_predicate(pred, 0.0, upper, tol);

  // Largest fixed point at the upper end of the bracket.
  const double beta_hi = br.hi;
  const int steps = static_cast<int>(std::lround(1.0 / kQStep));
  double q_star = 0.0;
  for (int k = steps; k >= 1; --k) {
    const double q = k * kQStep;
    if (replica_fixed_point_map(spec, beta_hi, q) - q >= 0.0) {
      double lo = q;
      double hi = std::min(1.0, q + kQStep);
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (replica_fixed_point_map(spec, beta_hi, mid) - mid >= 0.0 ? lo : hi) = mid;
      }
      q_star = lo;
      break;
    }
  }
  if (q_star == 0.0) {
    // Tangency finer than the grid: use the refined touching point.
    q_star = golden_section([&](double q) { return q - replica_fixed_point_map(spec, beta_hi, q); },
                            kQStep * 1e-3, 1.0, 1e-10)
                 .x;
  }

  ThresholdReport report;
  report.name = ThresholdName::beta_d;
  report.value = 0.5 * (br.lo + br.hi);
  report.interval = Interval{br.lo, br.hi};
  report.minimizer = q_star;
  report.minimizer_kind = "q";
  report.spec = spec;
  report.settings = {{"tol", tol}, {"q_step", kQStep}, {"hermite_nodes", 201}, {"bracket_hi", upper}};
  return report;
}

double bar_beta_d_objective(const MixtureSpec& spec, double s) {
  const double h = normal_upper_half_quantile(s);
  return 2.0 * std::sqrt(spec.xi(1.0, 1)) * normal_pdf(h) / spec.xi_gap(s);
}

double bar_beta_d_spherical_objective(const MixtureSpec& spec, double s) {
  return std::sqrt(spec.xi(1.0, 1) * s * (2.0 - s)) / spec.xi_gap(s);
}

namespace {

ThresholdReport infimum_report(ThresholdName name, const MixtureSpec& spec,
                               double (*objective)(const MixtureSpec&, double)) {
  const GridMin m = minimize_over_q([&](double s) { return objective(spec, s); });
  ThresholdReport report;
  report.name = name;
  report.value = m.value;
  report.minimizer = 1.0 - m.s;
  report.minimizer_kind = "q";
  report.spec = spec;
  report.settings = {{"q_step", kQStep}, {"golden_width", kGoldenWidth}};
  return report;
}

}  // namespace

ThresholdReport bar_beta_d(const MixtureSpec& spec) {
  return infimum_report(ThresholdName::bar_beta_d, spec, &bar_beta_d_objective);
}

ThresholdReport bar_beta_d_spherical(const MixtureSpec& spec) {
  return infimum_report(ThresholdName::bar_beta_d_sph, spec, &bar_beta_d_spherical_objective);
}

double spherical_large_p_profile(double lambda) {
  return std::sqrt(2.0 * lambda) / -std::expm1(-lambda);
}

LargePConstants large_p_constants() {
  LargePConstants out;
  // g is unimodal on (0, inf): grid, then golden section.
  double best = 0.01;
  for (double lam = 0.01; lam <= 10.0; lam += 0.01) {
    if (spherical_large_p_profile(lam) < spherical_large_p_profile(best)) best = lam;
  }
  const Minimum m = golden_section(spherical_large_p_profile, best - 0.01, best + 0.01, 1e-12);
  out.limit_value = m.value;
  out.lambda_star = m.x;

  // Sublevel set {g <= v} = [lambda2(v), lambda1(v)] around lambda_star.
  const auto endpoints = [&](double v) {
    const auto below = [v](double lam) { return spherical_large_p_profile(lam) <= v; };
    double lo = 1e-12;
    double hi = out.lambda_star;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (below(mid) ? hi : lo) = mid;
    }
    const double left = hi;
    lo = out.lambda_star;
    hi = 1e3;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (below(mid) ? lo : hi) = mid;
    }
    return std::pair{left, lo};
  };
  const Bracket br = bisect_predicate(
      [&](double v) {
        const auto [l2, l1] = endpoints(v);
        return l1 >= 3.0 * l2;
      },
      out.limit_value, 10.0, 1e-13);
  out.C = br.hi;
  const auto [l2, l1] = endpoints(br.hi);
  out.lambda2 = l2;
  out.lambda1 = l1;
  return out;
}

double beta_d_spherical(int p) {
  if (p < 3) throw ValidationError("beta_d_spherical needs p >= 3");
  const double pm1 = p - 1.0;
  const double pm2 = p - 2.0;
  const double log_ratio = pm1 * std::log(pm1) - std::log(static_cast<double>(p)) -
                           (pm2 > 0.0 ? pm2 * std::log(pm2) : 0.0);
  return std::exp(0.5 * log_ratio);
}

Interval beta_c_bounds(int p) {
  if (p < 2) throw ValidationError("beta_c_bounds needs p >= 2");
  const double hi = std::sqrt(2.0 * std::numbers::ln2);
  return {(1.0 - std::ldexp(1.0, -p)) * hi, hi};
}

BetaCheck check_beta_below_critical(int p, double beta) {
  const Interval b = beta_c_bounds(p);
  if (beta > b.hi) return BetaCheck::above;
  if (beta >= b.lo) return BetaCheck::uncertain;
  return BetaCheck::below;
}

double e_alg(const MixtureSpec& spec, double quad_tol) {
  // x = t^2 removes the sqrt-type endpoint behaviour of sqrt(xi'') at 0.
  const auto integrand = [&spec](double t) {
    return 2.0 * t * std::sqrt(std::max(0.0, spec.xi(t * t, 2)));
  };
  const auto result = adaptive_simpson(integrand, 0.0, 1.0, quad_tol);
  if (!result.converged) throw AccuracyError("E_ALG quadrature did not converge", result.error_estimate);
  return result.value;
}

double u_dual_objective(double h, double q) {
  return h * (2.0 * normal_cdf(h) - 1.0) + 2.0 * normal_pdf(h) - h * q;
}

DualMinimum u_dual(double q) {
  if (!(q >= 0.0 && q < 1.0)) throw ValidationError("u_dual needs q in [0, 1)");
  const double h = q == 0.0 ? 0.0 : normal_upper_half_quantile(1.0 - q);
  return {h, 2.0 * normal_pdf(h)};
}

double v_ratio(double lambda) {
  if (lambda == 0.0) return 1.0;
  return lambda / -std::expm1(-lambda);
}

double ogp_condition_slack(const MixtureSpec& spec, double beta, double q_low, double q_high,
                           int samples) {
  const double scale = beta * spec.xi(1.0);
  const double lead = 2.0 * std::sqrt(spec.xi(1.0, 1));
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const double q = q_low + (q_high - q_low) * i / samples;
    const double s = 1.0 - q;
    const double lhs = s > 0.0 ? lead * normal_pdf(normal_upper_half_quantile(s)) : 0.0;
    const double rhs = beta * spec.xi_gap(s);
    worst = std::min(worst, (rhs - lhs) / scale);
  }
  return worst;
}

OgpBand ogp_band_pure_p(int p, double eps_prime, double rate) {
  if (p < 3) throw ValidationError("ogp_band_pure_p needs p >= 3");
  if (!(eps_prime > 0.0)) throw ValidationError("eps' must be > 0");
  const double target = 1.0 + eps_prime;
  const auto exceeds = [target](double d) { return v_ratio(d) * std::sqrt(1.0 + d) >= target; };
  double hi = 1.0;
  while (!exceeds(hi)) hi *= 2.0;
  const Bracket br = bisect_predicate(exceeds, 0.0, hi, 1e-14);
  const double delta = br.lo;

  OgpBand band;
  band.delta = delta;
  band.rate = rate;
  band.q_low = 1.0 - delta / p;
  band.q_high = 1.0 - std::pow(static_cast<double>(p), -(1.0 + delta));
  band.r = 0.5 * (1.0 - band.q_high);
  band.R = 0.5 * (1.0 - band.q_low);

  const MixtureSpec spec = MixtureSpec::pure(p);
  const double beta = target * std::sqrt(2.0 * std::log(static_cast<double>(p)) / p);
  if (band.q_low >= band.q_high) {
    band.feasible = false;
    band.diagnostic = "q_low >= q_high at this p (need delta p^delta > 1)";
    return band;
  }
  const double slack = ogp_condition_slack(spec, beta, band.q_low, band.q_high);
  if (!(slack > 0.0)) {
    band.feasible = false;
    band.diagnostic = "overlap-gap inequality fails inside the window at this p";
    return band;
  }
  band.eps = 0.5 * slack;
  band.feasible = true;
  if (!band.full_separation()) band.diagnostic = "r >= R/3: only most-pairs separation";
  return band;
}

}  // namespace pspin
