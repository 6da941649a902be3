#include "pspin/mixture.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "pspin/common.hpp"

namespace pspin {
namespace {

double ipow(double x, int e) {
  double result = 1.0;
  double base = x;
  while (e > 0) {
    if (e & 1) result *= base;
    base *= base;
    e >>= 1;
  }
  return result;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s) {
  s = trim(s);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("invalid integer in mixture: '" + std::string(s) + "'");
  }
  return value;
}

double parse_double(std::string_view s) {
  s = trim(s);
  std::string buf(s);
  char* end = nullptr;
  const double value = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) {
    throw ValidationError("invalid number in mixture: '" + buf + "'");
  }
  return value;
}

}  // namespace

MixtureSpec::MixtureSpec(std::vector<MixtureTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw ValidationError("mixture has no terms");
  std::sort(terms_.begin(), terms_.end(),
            [](const MixtureTerm& a, const MixtureTerm& b) { return a.degree < b.degree; });
  bool any_nonzero = false;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    if (t.degree < 2) {
      throw ValidationError("invalid degree " + std::to_string(t.degree) + " (need k >= 2)");
    }
    if (i > 0 && terms_[i - 1].degree == t.degree) {
      throw ValidationError("duplicate degree " + std::to_string(t.degree));
    }
    if (!std::isfinite(t.gamma)) throw ValidationError("non-finite mixture coefficient");
    any_nonzero = any_nonzero || t.gamma != 0.0;
  }
  if (!any_nonzero) throw ValidationError("all mixture coefficients are zero");
}

MixtureSpec MixtureSpec::pure(int p) {
  if (p < 2) throw ValidationError("invalid degree " + std::to_string(p) + " (need p >= 2)");
  return MixtureSpec({{p, 1.0}});
}

MixtureSpec MixtureSpec::parse(std::string_view text) {
  text = trim(text);
  if (text.starts_with("pure:")) return pure(parse_int(text.substr(5)));
  std::vector<MixtureTerm> terms;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw ValidationError("mixture term '" + std::string(item) + "' is not of the form k:gamma");
    }
    terms.push_back({parse_int(item.substr(0, colon)), parse_double(item.substr(colon + 1))});
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return MixtureSpec(std::move(terms));
}

double MixtureSpec::xi(double x, int order) const {
  if (order < 0 || order > 2) throw ValidationError("xi derivative order must be 0, 1 or 2");
  // Horner over the sparse exponents k - order, highest first.
  double acc = 0.0;
  int prev_exp = -1;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const int k = it->degree;
    double c = it->gamma * it->gamma;
    for (int j = 0; j < order; ++j) c *= static_cast<double>(k - j);
    const int e = k - order;
    acc = (prev_exp < 0 ? 0.0 : acc * ipow(x, prev_exp - e)) + c;
    prev_exp = e;
  }
  return acc * ipow(x, prev_exp);
}

double MixtureSpec::xi_gap(double s) const {
  double total = 0.0;
  for (const auto& t : terms_) {
    const double g2 = t.gamma * t.gamma;
    total += (s >= 1.0) ? g2 : -g2 * std::expm1(t.degree * std::log1p(-s));
  }
  return total;
}

std::string MixtureSpec::to_string() const {
  if (terms_.size() == 1 && terms_[0].gamma == 1.0) {
    return "pure:" + std::to_string(terms_[0].degree);
  }
  std::string out;
  char buf[64];
  for (const auto& t : terms_) {
    if (!out.empty()) out += ',';
    std::snprintf(buf, sizeof buf, "%d:%.17g", t.degree, t.gamma);
    out += buf;
  }
  return out;
}

}  // namespace pspin
