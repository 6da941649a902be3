#include "pspin/numerics.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "pspin/common.hpp"

namespace pspin {

namespace {

struct HermiteValue {
  double value;  // orthonormal h_n(z), without the exp(-z^2/2) factor
  double deriv;
};

HermiteValue hermite_orthonormal(int n, double z) {
  constexpr double kPiQuarter = 0.7511255444649425;  // pi^{-1/4}
  double p1 = kPiQuarter;
  double p2 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double p3 = p2;
    p2 = p1;
    p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
  }
  return {p1, std::sqrt(2.0 * n) * p2};
}

}  // namespace

// Roots bracketed by sign changes on a grid finer than the smallest node
// spacing, then polished by Newton kept inside the bracket.
GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw ValidationError("Gauss-Hermite rule needs n >= 1");
  if (n > 2000) throw ValidationError("Gauss-Hermite rule limited to n <= 2000");
  const double top = std::sqrt(2.0 * n + 1.0) + 1.0;
  const double step = 0.05 / std::sqrt(2.0 * n + 1.0);
  std::vector<double> positive;
  double a = (n % 2 == 1) ? step / 2 : 0.0;
  double fa = hermite_orthonormal(n, a).value;
  while (a < top && static_cast<int>(positive.size()) < n / 2) {
    const double b = a + step;
    const double fb = hermite_orthonormal(n, b).value;
    if ((fa < 0.0) != (fb < 0.0)) {
      double lo = a, hi = b, z = 0.5 * (a + b);
      const bool rising = fb > fa;
      for (int it = 0; it < 100; ++it) {
        const auto h = hermite_orthonormal(n, z);
        if ((h.value > 0.0) == rising) hi = z; else lo = z;
        double next = z - h.value / h.deriv;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - z) <= 1e-15 * std::max(1.0, std::abs(z))) {
          z = next;
          break;
        }
        z = next;
      }
      positive.push_back(z);
    }
    a = b;
    fa = fb;
  }
  if (static_cast<int>(positive.size()) != n / 2) {
    throw AccuracyError("Gauss-Hermite root bracketing missed nodes",
                        static_cast<double>(n / 2 - static_cast<int>(positive.size())));
  }
  GaussHermiteRule rule;
  const auto weight = [n](double z) {
    const double d = hermite_orthonormal(n, z).deriv;
    return 2.0 / (d * d);
  };
  for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
    rule.nodes.push_back(-*it);
    rule.weights.push_back(weight(*it));
  }
  if (n % 2 == 1) {
    rule.nodes.push_back(0.0);
    rule.weights.push_back(weight(0.0));
  }
  for (double z : positive) {
    rule.nodes.push_back(z);
    rule.weights.push_back(weight(z));
  }
  return rule;
}

const GaussHermiteRule& hermite201() {
  static const GaussHermiteRule rule = gauss_hermite(201);
  return rule;
}

double gaussian_expectation(const GaussHermiteRule& rule, double mean,
                            const std::function<double(double)>& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mean + std::numbers::sqrt2 * rule.nodes[i]);
  }
  return sum / std::sqrt(std::numbers::pi);
}

namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  bool converged = true;
  double error = 0.0;
};

double simpson_step(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) {
    st.error += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (depth <= 0) {
    st.converged = false;
    st.error += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_step(st, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(st, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double tol, int max_depth) {
  SimpsonState st{f};
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  QuadratureResult out;
  out.value = simpson_step(st, a, b, fa, fm, fb, whole, tol, max_depth);
  out.error_estimate = st.error;
  out.converged = st.converged;
  return out;
}

Minimum golden_section(const std::function<double(double)>& f, double a, double b, double width) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > width) {
    // Ties move the bracket left so the smaller minimizer wins.
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

Bracket bisect_predicate(const std::function<bool(double)>& pred, double lo, double hi, double tol,
                         int max_iter) {
  if (pred(lo)) throw ValidationError("bisection bracket: predicate already true at lower end");
  if (!pred(hi)) throw ValidationError("bisection bracket: predicate false at upper end");
  for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pred(mid) ? hi : lo) = mid;
  }
  return {lo, hi};
}

}  // namespace pspin
