#include "pspin/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "pspin/algolab.hpp"
#include "pspin/disorder.hpp"
#include "pspin/landscape.hpp"
#include "pspin/ogp.hpp"
#include "pspin/shattering.hpp"
#include "pspin/thresholds.hpp"

namespace pspin::cli {
namespace {

using nlohmann::json;

// Validation failure that still produces a report on stdout.
class ReportedFailure : public ValidationError {
 public:
  ReportedFailure(const std::string& what, json payload)
      : ValidationError(what), payload_(std::move(payload)) {}
  const json& payload() const noexcept { return payload_; }

 private:
  json payload_;
};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json num(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

template <typename T>
json opt_num(const std::optional<T>& v) {
  return v ? num(static_cast<double>(*v)) : json(nullptr);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ValidationError(std::string("bad number '") + item + "' in " + what);
    }
  }
  if (out.empty()) throw ValidationError(std::string("empty list for ") + what);
  return out;
}

std::pair<double, double> parse_pair(const std::string& text, const char* what) {
  const auto v = parse_list(text, what);
  if (v.size() != 2) throw ValidationError(std::string(what) + " needs two comma-separated values");
  return {v[0], v[1]};
}

double parse_real(const std::string& text, const char* what) {
  const auto v = parse_list(text, what);
  if (v.size() != 1) throw ValidationError(std::string(what) + " needs one value");
  return v[0];
}

json band_json(const OgpBand& b) {
  return {{"q_low", num(b.q_low)}, {"q_high", num(b.q_high)}, {"r", num(b.r)},
          {"R", num(b.R)},         {"eps", num(b.eps)},       {"delta", num(b.delta)},
          {"rate", num(b.rate)},   {"feasible", b.feasible},  {"full_separation", b.full_separation()},
          {"diagnostic", b.diagnostic}};
}

json report_json(const ThresholdReport& r) {
  json settings = json::object();
  for (const auto& [k, v] : r.settings) settings[k] = num(v);
  json j = {{"name", to_string(r.name)}, {"value", num(r.value)}, {"settings", settings}};
  j["minimizer"] = opt_num(r.minimizer);
  if (!r.minimizer_kind.empty()) j["minimizer_kind"] = r.minimizer_kind;
  if (r.interval) j["interval"] = {num(r.interval->lo), num(r.interval->hi)};
  if (r.spec) j["mixture"] = r.spec->to_string();
  return j;
}

json estimate_json(const McEstimate& e) {
  return {{"mean", num(e.mean)}, {"std_error", num(e.std_error)}, {"replicas", e.replicas}};
}

// Options shared by several subcommands; each subcommand binds what it uses.
struct Options {
  std::string mixture = "pure:3";
  int n = 0;
  double beta = 0.0;
  std::string beta_prime;
  double eps = 0.0;
  double eps_prime = 0.0;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out;
  std::string config;
  std::string in;
  std::string table;
  double band_width = 0.1;
  int cap = kDefaultEnumerationCap;

  std::string which = "all";
  double tol = 1e-8;
  std::string sweep;

  std::string kind = "null";

  std::string band;
  std::string band_q;
  std::string auto_band;
  double band_eps = 0.0;
  std::string clusters_csv;

  std::string mode = "sf";
  std::string model = "null";
  std::string q = "0.5";
  std::string tau = "0";
  int grid_k = 4;
  double rate_c = 0.1;
  std::size_t replicas = 100;
  std::size_t inner = 20;

  std::string algorithm = "greedy:100";
  std::string taus = "0,0.25,0.5,0.75,1";
  std::string concentration;
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int main(const std::vector<std::string>& args);

 private:
  void add_common(CLI::App* sub, bool stochastic);
  void add_band(CLI::App* sub);
  OgpBand resolve_band(int n) const;
  double resolve_beta_prime() const;
  void warn_beta(const MixtureSpec& spec, double beta) const;
  json envelope(const CLI::App* sub, json result) const;
  void emit_json(const json& j) const;
  void emit_text(const std::string& text) const;

  void cmd_thresholds();
  void cmd_disorder_dump();
  void cmd_disorder_load();
  void cmd_enumerate();
  void cmd_shatter();
  void cmd_ogp();
  void cmd_chi();
  void cmd_rarity();

  std::ostream& out_;
  std::ostream& err_;
  Options o_;
  CLI::App* active_ = nullptr;
  std::map<const CLI::App*, bool> seeded_;
};

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// CLI11 only reads config files attached to the root app, so the file named
// by --config is expanded here into flags appended after the given ones.
std::vector<std::string> with_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const auto items = CLI::ConfigBase().from_file(path);
  std::vector<std::string> full = args;
  for (const auto& item : items) {
    if (!item.parents.empty() || item.name == "++" || item.name == "--") {
      const std::string section = item.parents.empty() ? item.name : item.parents.front();
      throw CLI::ConversionError("config file must be flat key=value; found section [" + section + "]");
    }
    const std::string flag = "--" + item.name;
    if (has_flag(args, flag)) continue;
    std::string value;
    for (const auto& v : item.inputs) value += (value.empty() ? "" : ",") + v;
    full.push_back(flag);
    full.push_back(value);
  }
  return full;
}

void Runner::add_common(CLI::App* sub, bool stochastic) {
  sub->add_option("--config", o_.config, "Flat key=value file; command-line flags override it");
  sub->add_option("--format", o_.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--out", o_.out, "Write the report here instead of stdout");
  if (stochastic) {
    sub->add_option("--seed", o_.seed, "Master seed")->required();
  }
}

void Runner::add_band(CLI::App* sub) {
  auto* g = sub->add_option_group("band", "Overlap band (one of)");
  auto* a = g->add_option("--band", o_.band, "Radii r,R");
  auto* b = g->add_option("--band-q", o_.band_q, "Overlaps q_low,q_high");
  auto* c = g->add_option("--auto-band", o_.auto_band, "Pure p-spin band P,EPS'");
  a->excludes(b)->excludes(c);
  b->excludes(c);
  sub->add_option("--band-eps", o_.band_eps, "eps carried by a user band");
}

OgpBand Runner::resolve_band(int n) const {
  if (!o_.auto_band.empty()) {
    const auto [pv, ep] = parse_pair(o_.auto_band, "--auto-band");
    if (pv != std::floor(pv) || pv < 2) throw ValidationError("--auto-band needs an integer p >= 2");
    const OgpBand band = ogp_band_pure_p(static_cast<int>(pv), ep);
    if (!band.feasible) {
      json payload = {{"version", kVersion},
                      {"status", "band_infeasible"},
                      {"auto_band", {{"p", static_cast<int>(pv)}, {"eps_prime", num(ep)}}},
                      {"band", band_json(band)}};
      if (n > 0) payload["n"] = n;
      throw ReportedFailure("auto band infeasible: " + band.diagnostic, payload);
    }
    return band;
  }
  if (!o_.band.empty()) {
    const auto [r, R] = parse_pair(o_.band, "--band");
    return OgpBand::from_radii(r, R, o_.band_eps);
  }
  if (!o_.band_q.empty()) {
    const auto [lo, hi] = parse_pair(o_.band_q, "--band-q");
    return OgpBand::from_overlaps(lo, hi, o_.band_eps);
  }
  throw ValidationError("a band is required: --band r,R, --band-q qlo,qhi or --auto-band P,EPS'");
}

double Runner::resolve_beta_prime() const {
  if (o_.beta_prime.empty()) return o_.beta;
  return parse_real(o_.beta_prime, "--beta-prime");
}

void Runner::warn_beta(const MixtureSpec& spec, double beta) const {
  if (!spec.is_pure() || spec.terms()[0].gamma != 1.0) return;
  switch (check_beta_below_critical(spec.max_degree(), beta)) {
    case BetaCheck::below:
      break;
    case BetaCheck::uncertain:
      err_ << "warning: beta " << fmt(beta) << " lies inside the beta_c bracket\n";
      break;
    case BetaCheck::above:
      err_ << "warning: beta " << fmt(beta) << " is above the beta_c upper bound\n";
      break;
  }
}

json Runner::envelope(const CLI::App* sub, json result) const {
  json config = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || name == "out") continue;
    if (opt->count() > 0) {
      std::string joined;
      for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
      config[name] = joined;
    } else if (!opt->get_default_str().empty()) {
      config[name] = opt->get_default_str();
    }
  }
  for (const CLI::App* group : sub->get_subcommands([](const CLI::App*) { return true; })) {
    for (const CLI::Option* opt : group->get_options()) {
      if (opt->count() == 0) continue;
      std::string joined;
      for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
      config[opt->get_single_name()] = joined;
    }
  }
  json j = {{"version", kVersion}, {"command", sub->get_name()}, {"config", config}};
  if (seeded_.count(sub)) j["seed"] = o_.seed;
  j["result"] = std::move(result);
  return j;
}

void Runner::emit_text(const std::string& text) const {
  if (o_.out.empty()) {
    out_ << text;
    return;
  }
  std::ofstream f(o_.out, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + o_.out + "' for writing");
  f << text;
}

void Runner::emit_json(const json& j) const { emit_text(j.dump(2) + "\n"); }

// ---- thresholds ---------------------------------------------------------------

void Runner::cmd_thresholds() {
  if (!o_.sweep.empty()) {
    std::string csv = "p,beta_d,bar_beta_d,bar_beta_d_sph,e_alg\n";
    json rows = json::array();
    for (double pv : parse_list(o_.sweep, "--sweep")) {
      if (pv != std::floor(pv) || pv < 2) throw ValidationError("--sweep needs integers p >= 2");
      const auto spec = MixtureSpec::pure(static_cast<int>(pv));
      const double bd = beta_d(spec, o_.tol).value;
      const double bbd = bar_beta_d(spec).value;
      const double bbs = bar_beta_d_spherical(spec).value;
      const double ea = e_alg(spec);
      csv += std::to_string(static_cast<int>(pv)) + "," + fmt(bd) + "," + fmt(bbd) + "," + fmt(bbs) +
             "," + fmt(ea) + "\n";
      rows.push_back({{"p", static_cast<int>(pv)},
                      {"beta_d", num(bd)},
                      {"bar_beta_d", num(bbd)},
                      {"bar_beta_d_sph", num(bbs)},
                      {"e_alg", num(ea)}});
    }
    if (o_.format == "csv") {
      emit_text(csv);
    } else {
      emit_json(envelope(active_, {{"sweep", rows}}));
    }
    return;
  }

  const MixtureSpec spec = MixtureSpec::parse(o_.mixture);
  const bool pure = spec.is_pure() && spec.terms()[0].gamma == 1.0;
  const int p = spec.max_degree();
  const auto want = [&](const char* name) { return o_.which == "all" || o_.which == name; };
  static const std::vector<std::string> known = {"all",    "beta_d", "bar_beta_d", "bar_beta_d_sph",
                                                 "beta_d_sph", "beta_c", "e_alg", "large_p"};
  if (std::find(known.begin(), known.end(), o_.which) == known.end()) {
    throw CLI::ValidationError("--which", "unknown threshold '" + o_.which + "'");
  }
  if (!pure && (o_.which == "beta_d_sph" || o_.which == "beta_c")) {
    throw ValidationError(o_.which + " is defined for pure p-spin mixtures only");
  }

  std::vector<ThresholdReport> reports;
  if (want("beta_d")) reports.push_back(beta_d(spec, o_.tol));
  if (want("bar_beta_d")) reports.push_back(bar_beta_d(spec));
  if (want("bar_beta_d_sph")) reports.push_back(bar_beta_d_spherical(spec));
  if (want("e_alg")) {
    ThresholdReport r;
    r.name = ThresholdName::e_alg;
    r.value = e_alg(spec);
    r.spec = spec;
    r.settings = {{"quad_tol", 1e-10}};
    reports.push_back(r);
  }
  if (pure && want("beta_d_sph") && p >= 3) {
    ThresholdReport r;
    r.name = ThresholdName::beta_d_sph;
    r.value = beta_d_spherical(p);
    r.spec = spec;
    reports.push_back(r);
  }
  if (pure && want("beta_c")) {
    ThresholdReport r;
    r.name = ThresholdName::beta_c_bounds;
    r.interval = beta_c_bounds(p);
    r.value = r.interval->hi;
    r.spec = spec;
    reports.push_back(r);
  }
  if (want("large_p")) {
    const LargePConstants c = large_p_constants();
    ThresholdReport lim;
    lim.name = ThresholdName::large_p_limit;
    lim.value = c.limit_value;
    lim.minimizer = c.lambda_star;
    lim.minimizer_kind = "lambda";
    reports.push_back(lim);
    ThresholdReport cc;
    cc.name = ThresholdName::constant_C;
    cc.value = c.C;
    cc.settings = {{"lambda1", c.lambda1}, {"lambda2", c.lambda2}};
    reports.push_back(cc);
  }

  if (o_.format == "csv") {
    std::string csv = "name,value,minimizer\n";
    for (const auto& r : reports) {
      csv += to_string(r.name) + "," + fmt(r.value) + "," + (r.minimizer ? fmt(*r.minimizer) : "") + "\n";
    }
    emit_text(csv);
    return;
  }
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  emit_json(envelope(active_, {{"mixture", spec.to_string()}, {"thresholds", arr}}));
}

// ---- disorder -------------------------------------------------------------------

json disorder_summary(const DisorderTensor& G) {
  return {{"n", G.n()},
          {"mixture", G.spec().to_string()},
          {"seed", G.seed()},
          {"kind", to_string(G.kind())},
          {"coupling_count", G.coupling_count()},
          {"energy_all_ones", num(energy(G, Config{0}))}};
}

void Runner::cmd_disorder_dump() {
  const MixtureSpec spec = MixtureSpec::parse(o_.mixture);
  if (o_.n < 1) throw ValidationError("--n must be >= 1");
  if (o_.out.empty()) throw ValidationError("disorder dump needs --out");
  json extra = json::object();
  std::optional<DisorderTensor> G;
  if (o_.kind == "null") {
    G = sample_null(o_.n, spec, o_.seed);
  } else {
    auto inst = sample_planted(o_.n, spec, o_.beta, o_.seed);
    extra["sigma_star"] = inst.sigma_star;
    extra["beta"] = num(inst.beta);
    G = std::move(inst.G);
  }
  std::ofstream f(o_.out, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + o_.out + "' for writing");
  write_disorder(f, *G);
  f.close();
  json summary = disorder_summary(*G);
  summary.update(extra);
  summary["file"] = o_.out;
  const std::string path = o_.out;
  o_.out.clear();
  emit_json(envelope(active_, summary));
  o_.out = path;
}

void Runner::cmd_disorder_load() {
  std::ifstream f(o_.in, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + o_.in + "'");
  const DisorderTensor G = read_disorder(f);
  emit_json(envelope(active_, disorder_summary(G)));
}

// ---- enumerate -----------------------------------------------------------------------

void Runner::cmd_enumerate() {
  const MixtureSpec spec = MixtureSpec::parse(o_.mixture);
  check_enumeration_size(o_.n, o_.cap);
  warn_beta(spec, o_.beta);
  const DisorderTensor G = sample_null(o_.n, spec, o_.seed);
  const EnergyTable table = enumerate(G, o_.cap);
  const GibbsEnsemble mu(table, o_.beta);
  const double log_z = mu.log_z();
  const Config top = table.argmax();
  const double band = o_.beta > 0.0 ? energy_band_mass(mu, o_.band_width) : std::nan("");
  if (!o_.table.empty()) {
    std::ofstream f(o_.table, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + o_.table + "' for writing");
    write_table(f, table);
  }
  if (o_.format == "csv") {
    emit_text("logZ,max_energy,band_mass\n" + fmt(log_z) + "," + fmt(table[top]) + "," + fmt(band) + "\n");
    return;
  }
  emit_json(envelope(active_, {{"n", o_.n},
                               {"logZ", num(log_z)},
                               {"max_energy", num(table[top])},
                               {"argmax", top},
                               {"band_mass", num(band)},
                               {"band_eps", num(o_.band_width)}}));
}

// ---- shatter -----------------------------------------------------------------------

void Runner::cmd_shatter() {
  const MixtureSpec spec = MixtureSpec::parse(o_.mixture);
  check_enumeration_size(o_.n, o_.cap);
  const OgpBand band = resolve_band(o_.n);
  warn_beta(spec, o_.beta);
  ShatterParams params;
  params.beta = o_.beta;
  params.eps = o_.eps > 0.0 ? o_.eps : band.eps;
  params.band = band;
  double eps_prime = o_.eps_prime;
  if (eps_prime <= 0.0 && !o_.auto_band.empty()) eps_prime = parse_pair(o_.auto_band, "--auto-band").second;

  const DisorderTensor G = sample_null(o_.n, spec, o_.seed);
  const EnergyTable table = enumerate(G, o_.cap);
  const ShatterResult res = shatter(table, params);
  const ShatterReport& rep = res.report;

  std::string csv = "cluster,representative,size,diameter,mass\n";
  for (std::size_t c = 0; c < rep.clusters.size(); ++c) {
    csv += std::to_string(c) + "," + std::to_string(rep.representatives[c]) + "," +
           std::to_string(rep.clusters[c].size) + "," + fmt(rep.clusters[c].diameter) + "," +
           fmt(rep.clusters[c].mass) + "\n";
  }
  if (!o_.clusters_csv.empty()) {
    std::ofstream f(o_.clusters_csv, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + o_.clusters_csv + "' for writing");
    f << csv;
  }
  if (o_.format == "csv") {
    emit_text(csv);
    return;
  }
  json sep = rep.full_separation
                 ? json{{"kind", "min_separation"}, {"value", opt_num(rep.min_separation)}}
                 : json{{"kind", "close_pair_weight"}, {"value", opt_num(rep.close_pair_weight)}};
  json result = {
      {"n", rep.n},
      {"beta", num(rep.beta)},
      {"eps", num(rep.eps)},
      {"band", band_json(band)},
      {"energy_normalization", "N beta xi(1)"},
      {"num_clusters", rep.num_clusters},
      {"regular_size", rep.regular_size},
      {"max_diameter", opt_num(rep.max_diameter)},
      {"diameter_ok", rep.diameter_ok},
      {"min_separation_or_most_pairs_stat", sep},
      {"separation_ok", rep.separation_ok},
      {"max_mass", num(rep.max_mass)},
      {"log_max_mass_rate", opt_num(rep.log_max_mass_rate)},
      {"coverage", num(rep.coverage)},
      {"complement_breakdown",
       {{"band_failure", num(rep.band_failure_mass)},
        {"shell_failure", num(rep.shell_failure_mass)},
        {"shell_failure_in_band", num(rep.shell_failure_in_band_mass)},
        {"union_bound_total", num(rep.union_bound_total)}}},
      {"partition_ok", rep.partition_ok},
      {"shell_pairs", rep.shell_pairs},
      {"dichotomy_violations", rep.dichotomy_violations},
  };
  if (eps_prime > 0.0) {
    result["entropy_mass_bound"] = num(entropy_mass_bound(2.0 * band.r, o_.beta, params.eps, eps_prime));
  }
  emit_json(envelope(active_, result));
}

// ---- ogp ---------------------------------------------------------------------------

void Runner::cmd_ogp() {
  const MixtureSpec spec = MixtureSpec::parse(o_.mixture);
  check_enumeration_size(o_.n, o_.cap);
  std::string csv;
  json rows = json::array();

  if (o_.mode == "sf") {
    csv = "q,mean,std_error,bound,replicas\n";
    for (double q : parse_list(o_.q, "--q")) {
      const McEstimate e = sf_empirical(spec, o_.n, q, o_.replicas, o_.seed);
      const double bound = sf_bound(spec, o_.n, q);
      csv += fmt(q) + "," + fmt(e.mean) + "," + fmt(e.std_error) + "," + fmt(bound) + "," +
             std::to_string(e.replicas) + "\n";
      rows.push_back({{"q", num(q)},
                      {"mean", num(e.mean)},
                      {"std_error", num(e.std_error)},
                      {"bound", num(bound)},
                      {"replicas", e.replicas}});
    }
  } else {
    const OgpBand band = resolve_band(o_.n);
    const double bp = resolve_beta_prime();
    warn_beta(spec, o_.beta);
    csv = "tau,q_low,q_high,estimate,std_error,replicas\n";
    const auto row = [&](const std::string& tau, double est, double se, std::size_t reps, json extra) {
      csv += tau + "," + fmt(band.q_low) + "," + fmt(band.q_high) + "," + fmt(est) + "," + fmt(se) + "," +
             std::to_string(reps) + "\n";
      json j = {{"tau", tau},           {"q_low", num(band.q_low)}, {"q_high", num(band.q_high)},
                {"estimate", num(est)}, {"std_error", num(se)},     {"replicas", reps}};
      j.update(extra);
      rows.push_back(j);
    };
    if (o_.mode == "soft") {
      const OgpMode mode = o_.model == "planted" ? OgpMode::planted_model : OgpMode::null_model;
      for (double tau : parse_list(o_.tau, "--tau")) {
        const SoftOgpEstimate e =
            soft_ogp_estimate(mode, o_.n, spec, o_.beta, bp, band, tau, o_.replicas, o_.inner, o_.seed);
        if (e.empty_window) err_ << "warning: overlap window holds no parity-grid point\n";
        row(fmt(tau), e.estimate, e.std_error, e.replicas,
            {{"mode", to_string(mode)}, {"empty_window", e.empty_window}});
      }
    } else if (o_.mode == "tau1") {
      const McEstimate e = tau1_probability(o_.n, spec, o_.beta, band.q_low, o_.replicas, o_.seed);
      row("1", e.mean, e.std_error, e.replicas, json::object());
    } else if (o_.mode == "exceptional") {
      const ExceptionalMass m = exceptional_mass(o_.n, spec, o_.beta, bp, band, o_.grid_k, o_.rate_c,
                                                 o_.replicas, o_.inner, o_.seed);
      row("grid", m.estimate, m.std_error, m.samples,
          {{"grid_k", o_.grid_k},
           {"rate_c", num(o_.rate_c)},
           {"threshold", num(membership_threshold(o_.n, o_.rate_c))},
           {"indeterminate", m.indeterminate}});
    }
  }
  if (o_.format == "csv") {
    emit_text(csv);
    return;
  }
  emit_json(envelope(active_, {{"mode", o_.mode}, {"rows", rows}}));
}

// ---- chi / rarity -------------------------------------------------------------------

void Runner::cmd_chi() {
  const MixtureSpec spec = MixtureSpec::parse(o_.mixture);
  const auto alg = make_algorithm(o_.algorithm);
  checked_coupling_count(o_.n, spec);
  const ChiCurve curve = chi_estimate(*alg, o_.n, spec, parse_list(o_.taus, "--taus"), o_.replicas, o_.seed);
  std::string csv = "tau,chi,se\n";
  json rows = json::array();
  for (std::size_t t = 0; t < curve.tau.size(); ++t) {
    csv += fmt(curve.tau[t]) + "," + fmt(curve.chi[t]) + "," + fmt(curve.std_error[t]) + "\n";
    rows.push_back({{"tau", num(curve.tau[t])}, {"chi", num(curve.chi[t])}, {"se", num(curve.std_error[t])}});
  }
  if (o_.format == "csv") {
    emit_text(csv);
    return;
  }
  json result = {{"algorithm", curve.algorithm}, {"n", o_.n}, {"replicas", curve.replicas}, {"curve", rows}};
  if (!o_.concentration.empty()) {
    json checks = json::array();
    for (double tau : parse_list(o_.tau, "--tau")) {
      const ConcentrationCheck chk = chi_concentration_check(
          *alg, o_.n, spec, tau, o_.replicas, parse_list(o_.concentration, "--concentration"), o_.seed);
      json trows = json::array();
      for (const auto& r : chk.rows) {
        trows.push_back({{"t", num(r.t)},
                         {"exceedance", num(r.exceedance)},
                         {"std_error", num(r.std_error)},
                         {"bound", num(r.bound)},
                         {"pass", r.pass}});
      }
      checks.push_back({{"tau", num(tau)},
                        {"chi", num(chk.chi)},
                        {"applicable", chk.applicable},
                        {"lipschitz", num(chk.lipschitz)},
                        {"violated", chk.violated},
                        {"rows", trows}});
    }
    result["concentration"] = checks;
  }
  emit_json(envelope(active_, result));
}

void Runner::cmd_rarity() {
  const MixtureSpec spec = MixtureSpec::parse(o_.mixture);
  check_enumeration_size(o_.n, o_.cap);
  const auto alg = make_algorithm(o_.algorithm);
  const OgpBand band = resolve_band(o_.n);
  const double bp = resolve_beta_prime();
  warn_beta(spec, o_.beta);
  const RarityReport rep =
      rarity_report(*alg, o_.n, spec, o_.beta, bp, band, o_.grid_k, o_.rate_c, o_.replicas, o_.inner, o_.seed);
  json split = json::array();
  for (const auto& s : rep.split) {
    split.push_back({{"term", s.term},
                     {"first_half", num(s.first)},
                     {"second_half", num(s.second)},
                     {"combined_se", num(s.combined_se)},
                     {"consistent", s.consistent}});
  }
  json result = {{"algorithm", rep.algorithm},
                 {"n", rep.n},
                 {"beta", num(rep.beta)},
                 {"beta_prime", num(rep.beta_prime)},
                 {"band", band_json(band)},
                 {"grid_k", rep.K},
                 {"rate_c", num(rep.c)},
                 {"replicas", rep.replicas},
                 {"inner", rep.inner},
                 {"rounding", rep.rounding},
                 {"not_in_s_beta", estimate_json(rep.not_in_s_beta)},
                 {"not_in_s_beta_prime", estimate_json(rep.not_in_s_beta_prime)},
                 {"in_exceptional", estimate_json(rep.in_exceptional)},
                 {"gibbs_exceptional_mass", estimate_json(rep.gibbs_exceptional)},
                 {"failure_lhs", estimate_json(rep.failure_lhs)},
                 {"mean_energy_raw", num(rep.mean_energy_raw)},
                 {"mean_energy_rounded", num(rep.mean_energy_rounded)},
                 {"split_sample", split},
                 {"split_consistent", rep.split_consistent}};
  if (o_.format == "csv") {
    std::string csv = "term,mean,std_error,replicas\n";
    const auto line = [&](const char* name, const McEstimate& e) {
      csv += std::string(name) + "," + fmt(e.mean) + "," + fmt(e.std_error) + "," + std::to_string(e.replicas) + "\n";
    };
    line("not_in_s_beta", rep.not_in_s_beta);
    line("not_in_s_beta_prime", rep.not_in_s_beta_prime);
    line("in_exceptional", rep.in_exceptional);
    line("gibbs_exceptional_mass", rep.gibbs_exceptional);
    line("failure_lhs", rep.failure_lhs);
    emit_text(csv);
    return;
  }
  emit_json(envelope(active_, result));
}

int Runner::main(const std::vector<std::string>& args) {
  CLI::App app{"Desk-scale laboratory for mixed p-spin spin glasses", "pspin_lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  int threads = 0;
  app.add_option("--threads", threads, "Worker count (default: $PSPIN_THREADS or OpenMP default)")
      ->check(CLI::PositiveNumber);

  auto* th = app.add_subcommand("thresholds", "Threshold temperatures and constants");
  add_common(th, false);
  th->add_option("--mixture", o_.mixture, "Mixture, e.g. pure:3 or 2:1,3:0.5")->capture_default_str();
  th->add_option("--which", o_.which, "all|beta_d|bar_beta_d|bar_beta_d_sph|beta_d_sph|beta_c|e_alg|large_p")
      ->capture_default_str();
  th->add_option("--tol", o_.tol, "Bisection tolerance for beta_d")->capture_default_str();
  th->add_option("--sweep", o_.sweep, "Comma-separated pure p values for a sweep table");

  auto* dis = app.add_subcommand("disorder", "Dump or load a disorder tensor");
  dis->require_subcommand(1);
  auto* dump = dis->add_subcommand("dump", "Sample a tensor and write it");
  add_common(dump, true);
  dump->add_option("--n", o_.n, "Number of spins")->required();
  dump->add_option("--mixture", o_.mixture)->capture_default_str();
  dump->add_option("--kind", o_.kind, "null|planted")->check(CLI::IsMember({"null", "planted"}))->capture_default_str();
  dump->add_option("--beta", o_.beta, "Planting strength")->capture_default_str();
  auto* load = dis->add_subcommand("load", "Read a tensor and summarize it");
  add_common(load, false);
  load->add_option("--in", o_.in, "Tensor file")->required();

  auto* en = app.add_subcommand("enumerate", "Exact energy table and Gibbs summary");
  add_common(en, true);
  en->add_option("--n", o_.n, "Number of spins")->required();
  en->add_option("--mixture", o_.mixture)->capture_default_str();
  en->add_option("--beta", o_.beta, "Inverse temperature")->required();
  en->add_option("--eps", o_.band_width, "Energy band half-width")->capture_default_str();
  en->add_option("--table", o_.table, "Write the energy table here");
  en->add_option("--cap", o_.cap, "Enumeration cap on N")->capture_default_str();

  auto* sh = app.add_subcommand("shatter", "Regular set, clusters and their verification");
  add_common(sh, true);
  sh->add_option("--n", o_.n)->required();
  sh->add_option("--mixture", o_.mixture)->capture_default_str();
  sh->add_option("--beta", o_.beta)->required();
  sh->add_option("--eps", o_.eps, "Band eps (default: the band's own eps)");
  sh->add_option("--eps-prime", o_.eps_prime, "eps' for the entropy bound");
  sh->add_option("--clusters-csv", o_.clusters_csv, "Per-cluster CSV table");
  sh->add_option("--cap", o_.cap)->capture_default_str();
  add_band(sh);

  auto* og = app.add_subcommand("ogp", "Soft overlap gap probes");
  add_common(og, true);
  og->add_option("--mode", o_.mode)->check(CLI::IsMember({"sf", "soft", "tau1", "exceptional"}))->capture_default_str();
  og->add_option("--n", o_.n)->required();
  og->add_option("--mixture", o_.mixture)->capture_default_str();
  og->add_option("--q", o_.q, "Overlaps for sf mode")->capture_default_str();
  og->add_option("--beta", o_.beta);
  og->add_option("--beta-prime", o_.beta_prime, "Level beta' (may be -inf; default beta)");
  og->add_option("--tau", o_.tau, "Interpolation values")->capture_default_str();
  og->add_option("--model", o_.model, "null|planted")->check(CLI::IsMember({"null", "planted"}))->capture_default_str();
  og->add_option("--grid-k", o_.grid_k)->capture_default_str();
  og->add_option("--rate-c", o_.rate_c)->capture_default_str();
  og->add_option("--replicas", o_.replicas)->capture_default_str();
  og->add_option("--inner", o_.inner)->capture_default_str();
  og->add_option("--cap", o_.cap)->capture_default_str();
  add_band(og);

  auto* ch = app.add_subcommand("chi", "Correlation curve of an algorithm");
  add_common(ch, true);
  ch->add_option("--algorithm", o_.algorithm, "constant|diagonal:S|greedy:M|hash")->capture_default_str();
  ch->add_option("--n", o_.n)->required();
  ch->add_option("--mixture", o_.mixture)->capture_default_str();
  ch->add_option("--taus", o_.taus)->capture_default_str();
  ch->add_option("--replicas", o_.replicas)->capture_default_str();
  ch->add_option("--concentration", o_.concentration, "Deviation levels t for the concentration check");
  ch->add_option("--tau", o_.tau, "tau values for the concentration check")->capture_default_str();

  auto* ra = app.add_subcommand("rarity", "Rarity report of an algorithm");
  add_common(ra, true);
  ra->add_option("--algorithm", o_.algorithm)->capture_default_str();
  ra->add_option("--n", o_.n)->required();
  ra->add_option("--mixture", o_.mixture)->capture_default_str();
  ra->add_option("--beta", o_.beta)->required();
  ra->add_option("--beta-prime", o_.beta_prime);
  ra->add_option("--grid-k", o_.grid_k)->capture_default_str();
  ra->add_option("--rate-c", o_.rate_c)->capture_default_str();
  ra->add_option("--replicas", o_.replicas)->capture_default_str();
  ra->add_option("--inner", o_.inner)->capture_default_str();
  ra->add_option("--cap", o_.cap)->capture_default_str();
  add_band(ra);

  for (auto* s : {dump, en, sh, og, ch, ra}) seeded_[s] = true;

  std::vector<std::string> full;
  try {
    full = with_config(args);
  } catch (const CLI::Error& e) {
    err_ << "error: " << e.what() << "\n";
    return usage;
  }
  std::vector<const char*> argv;
  argv.push_back("pspin_lab");
  for (const auto& a : full) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out_ << app.help();
    return ok;
  } catch (const CLI::CallForVersion&) {
    out_ << kVersion << "\n";
    return ok;
  } catch (const CLI::ParseError& e) {
    err_ << "error: " << e.what() << "\n";
    return usage;
  }

  if (threads <= 0) {
    if (const char* env = std::getenv(kThreadsEnv)) {
      try {
        threads = std::stoi(env);
      } catch (const std::logic_error&) {
        threads = 0;
      }
      if (threads <= 0) {
        err_ << "error: " << kThreadsEnv << " must be a positive integer\n";
        return usage;
      }
    }
  }
  if (threads > 0) omp_set_num_threads(threads);

  const auto start = std::chrono::steady_clock::now();
  try {
    if (*th) {
      active_ = th;
      cmd_thresholds();
    } else if (*dump) {
      active_ = dump;
      cmd_disorder_dump();
    } else if (*load) {
      active_ = load;
      cmd_disorder_load();
    } else if (*en) {
      active_ = en;
      cmd_enumerate();
    } else if (*sh) {
      active_ = sh;
      cmd_shatter();
    } else if (*og) {
      active_ = og;
      cmd_ogp();
    } else if (*ch) {
      active_ = ch;
      cmd_chi();
    } else if (*ra) {
      active_ = ra;
      cmd_rarity();
    }
  } catch (const CLI::ValidationError& e) {
    err_ << "error: " << e.what() << "\n";
    return usage;
  } catch (const ReportedFailure& e) {
    emit_json(e.payload());
    err_ << "error: " << e.what() << "\n";
    return validation;
  } catch (const ResourceError& e) {
    err_ << "error: " << e.what() << "\n";
    return resource;
  } catch (const Error& e) {
    err_ << "error: " << e.what() << "\n";
    return validation;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", wall);
  err_ << "wall_time_s=" << buf << "\n";
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Runner runner(out, err);
  return runner.main(args);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace pspin::cli
