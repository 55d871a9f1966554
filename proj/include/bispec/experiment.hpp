#pragma once

// Experiment configuration, validation and orchestration behind the command-line driver.
//
// Config file (INI):
//   [experiment]
//   name = bilinear-scan        ; one experiment per file
//   geometry = sphere
//   seed = 1
//   [params]
//   degrees = 8,16,32,64
//
// Every parameter is validated before any computation; unknown keys are rejected.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bispec/arithmetic.hpp"
#include "bispec/bilinear_estimates.hpp"
#include "bispec/bourgain.hpp"
#include "bispec/error.hpp"
#include "bispec/evolution.hpp"
#include "bispec/report.hpp"
#include "bispec/spectral_ops.hpp"
#include "bispec/strichartz.hpp"

namespace bispec {

enum class ExperimentKind { bilinear_scan, sogge_scan, lattice_scan, strichartz_scan, evolve, xsb_check, stability_probe };

inline const std::map<std::string, ExperimentKind>& experiment_names() {
  static const std::map<std::string, ExperimentKind> names = {
      {"bilinear-scan", ExperimentKind::bilinear_scan},     {"sogge-scan", ExperimentKind::sogge_scan},
      {"lattice-scan", ExperimentKind::lattice_scan},       {"strichartz-scan", ExperimentKind::strichartz_scan},
      {"evolve", ExperimentKind::evolve},                   {"xsb-check", ExperimentKind::xsb_check},
      {"stability-probe", ExperimentKind::stability_probe},
  };
  return names;
}

inline std::string to_string(ExperimentKind k) {
  for (const auto& [name, kind] : experiment_names())
    if (kind == k) return name;
  return "?";
}

/// Rejected configuration; `field` names the offending key as section.key.
class ConfigError : public InvalidParams {
 public:
  ConfigError(const std::string& field, const std::string& msg) : InvalidParams(field + ": " + msg), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::string experiment;
  std::string geometry = "sphere";
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "bispec-out";
  unsigned threads = 1;
  bool quick = false;
  std::map<std::string, std::string> params;
};

inline ExperimentConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", std::string("malformed INI: ") + e.message() + " (line " +
                                    std::to_string(e.line()) + ")");
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (section == "experiment") {
      for (const auto& [key, val] : body) {
        const std::string v = val.get_value<std::string>();
        if (key == "name") {
          cfg.experiment = v;
        } else if (key == "geometry") {
          cfg.geometry = v;
        } else if (key == "seed") {
          try {
            if (v.empty() || !std::all_of(v.begin(), v.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
              throw std::invalid_argument(v);
            cfg.seed = std::stoull(v);
          } catch (const std::exception&) {
            throw ConfigError("experiment.seed", "expected a nonnegative integer, got '" + v + "'");
          }
        } else {
          throw ConfigError("experiment." + key, "unknown key");
        }
      }
    } else if (section == "params") {
      for (const auto& [key, val] : body) cfg.params[key] = val.get_value<std::string>();
    } else {
      throw ConfigError(section, "unknown section (expected [experiment] and [params])");
    }
  }
  if (cfg.experiment.empty()) throw ConfigError("experiment.name", "missing");
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ExperimentPlan {
  ExperimentConfig config;
  ExperimentKind kind = ExperimentKind::bilinear_scan;

  std::vector<int> degrees;
  std::vector<std::int64_t> counts;  // lattice N or A values
  int l_ratio = 1;
  int restarts = 3;
  int alpha = 2;
  double half_width = 0.5;
  double p = 4.0;

  int k_max = 16;
  double T = 1.0;
  double dt = 1e-3;
  double amplitude = 1.0;
  double s = 1.0;
  int stride = 100;
  NonlinearScheme scheme = NonlinearScheme::galerkin_gauss;

  XsbSuiteOptions xsb{};

  double probe_a = 0.5;
  double probe_delta = 0.05;
  int probe_k_extra = -1;  // truncation k_max = n + extra; -1 selects 2n
};

namespace detail {

class ParamReader {
 public:
  explicit ParamReader(const std::map<std::string, std::string>& p) : p_(p) {}

  template <class T, class Check>
  T scalar(const std::string& key, T fallback, Check&& ok, const std::string& rule) {
    used_.insert(key);
    auto it = p_.find(key);
    if (it == p_.end()) {
      if (!ok(fallback)) throw ConfigError("params." + key, rule);
      return fallback;
    }
    T v = parse<T>(key, it->second);
    if (!ok(v)) throw ConfigError("params." + key, rule + ", got " + it->second);
    return v;
  }

  template <class T, class Check>
  std::vector<T> list(const std::string& key, std::vector<T> fallback, Check&& ok, const std::string& rule,
                      std::size_t min_len = 1) {
    used_.insert(key);
    auto it = p_.find(key);
    std::vector<T> v;
    if (it == p_.end()) {
      v = std::move(fallback);
    } else {
      std::stringstream ss(it->second);
      std::string tok;
      while (std::getline(ss, tok, ',')) v.push_back(parse<T>(key, trim(tok)));
    }
    if (v.size() < min_len)
      throw ConfigError("params." + key, "needs at least " + std::to_string(min_len) + " values");
    for (const auto& x : v)
      if (!ok(x)) throw ConfigError("params." + key, rule);
    if (!std::is_sorted(v.begin(), v.end()) || std::adjacent_find(v.begin(), v.end()) != v.end())
      throw ConfigError("params." + key, "values must be strictly increasing");
    return v;
  }

  std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
    used_.insert(key);
    auto it = p_.find(key);
    const std::string v = it == p_.end() ? fallback : trim(it->second);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string a;
      for (const auto& x : allowed) a += (a.empty() ? "" : "|") + x;
      throw ConfigError("params." + key, "expected one of " + a + ", got " + v);
    }
    return v;
  }

  void reject_unknown(const std::string& experiment) const {
    for (const auto& [k, v] : p_)
      if (!used_.count(k)) throw ConfigError("params." + k, "unknown parameter for " + experiment);
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  }

  template <class T>
  static T parse(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    try {
      std::size_t pos = 0;
      T v;
      if constexpr (std::is_same_v<T, int>)
        v = std::stoi(t, &pos);
      else if constexpr (std::is_same_v<T, std::int64_t>)
        v = std::stoll(t, &pos);
      else
        v = std::stod(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      if constexpr (std::is_floating_point_v<T>)
        if (!std::isfinite(v)) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("params." + key, "cannot parse '" + t + "' as a number");
    }
  }

  const std::map<std::string, std::string>& p_;
  std::set<std::string> used_;
};

inline void require_geometry(const ExperimentConfig& c, const std::vector<std::string>& allowed) {
  if (std::find(allowed.begin(), allowed.end(), c.geometry) == allowed.end()) {
    std::string a;
    for (const auto& x : allowed) a += (a.empty() ? "" : "|") + x;
    throw ConfigError("experiment.geometry", c.experiment + " supports " + a + ", got " + c.geometry);
  }
}

}  // namespace detail

/// Full validation; nothing is computed.
inline ExperimentPlan validate_config(const ExperimentConfig& cfg) {
  ExperimentPlan plan;
  plan.config = cfg;
  auto it = experiment_names().find(cfg.experiment);
  if (it == experiment_names().end()) throw ConfigError("experiment.name", "unknown experiment '" + cfg.experiment + "'");
  plan.kind = it->second;
  if (cfg.threads < 1) throw ConfigError("threads", "must be >= 1");
  const bool q = cfg.quick;
  detail::ParamReader r(cfg.params);
  auto pos_i = [](int v) { return v >= 1; };
  auto pos_l = [](std::int64_t v) { return v >= 1; };
  auto pos_d = [](double v) { return v > 0.0; };
  auto nonneg_d = [](double v) { return v >= 0.0; };

  switch (plan.kind) {
    case ExperimentKind::bilinear_scan:
      detail::require_geometry(cfg, {"sphere", "zoll"});
      plan.degrees = r.list<int>("degrees", q ? std::vector<int>{4, 8, 16, 32} : std::vector<int>{8, 16, 32, 64},
                                 pos_i, "degrees must be >= 1");
      plan.l_ratio = r.scalar<int>("l_ratio", 1, pos_i, "must be >= 1");
      plan.restarts = r.scalar<int>("restarts", 3, [](int v) { return v >= 0; }, "must be >= 0");
      plan.alpha = r.scalar<int>("alpha", 2, [](int v) { return v >= 0; }, "must be >= 0");
      plan.half_width = r.scalar<double>("half_width", 0.5, nonneg_d, "must be >= 0");
      if (cfg.geometry == "zoll" && zoll_separation_index(plan.alpha, plan.half_width) > 1)
        throw ConfigError("params.half_width", "Zoll clusters overlap beyond k = 0 for this alpha");
      break;
    case ExperimentKind::sogge_scan:
      detail::require_geometry(cfg, {"sphere"});
      plan.degrees = r.list<int>("degrees",
                                 q ? std::vector<int>{8, 16, 32, 64} : std::vector<int>{8, 16, 32, 64, 128}, pos_i,
                                 "degrees must be >= 1");
      plan.p = r.scalar<double>("p", 4.0, [](double v) { return v >= 2.0; }, "must be >= 2");
      break;
    case ExperimentKind::lattice_scan: {
      detail::require_geometry(cfg, {"sphere", "torus"});
      std::vector<std::int64_t> def;
      if (cfg.geometry == "sphere")
        for (int e = 1; e <= (q ? 8 : 10); ++e) def.push_back(std::int64_t{1} << e);
      else
        for (int a = 4; a <= (q ? 64 : 256); a *= 2) def.push_back(a);
      plan.counts = r.list<std::int64_t>(cfg.geometry == "sphere" ? "n" : "a", def, pos_l, "values must be >= 1");
      if (cfg.geometry == "sphere") plan.l_ratio = r.scalar<int>("l_ratio", 1, pos_i, "must be >= 1");
      break;
    }
    case ExperimentKind::strichartz_scan:
      detail::require_geometry(cfg, {"sphere", "torus"});
      if (cfg.geometry == "sphere")
        plan.degrees = r.list<int>("n", q ? std::vector<int>{2, 4, 8, 16} : std::vector<int>{4, 8, 16, 32}, pos_i,
                                   "band parameters must be >= 1", 4);
      else
        plan.degrees = r.list<int>("n", q ? std::vector<int>{1, 2, 3, 4} : std::vector<int>{1, 2, 4, 8}, pos_i,
                                   "band parameters must be >= 1", 4);
      plan.l_ratio = r.scalar<int>("l_ratio", 4, pos_i, "must be >= 1");
      plan.restarts = r.scalar<int>("restarts", 0, [](int v) { return v >= 0; }, "must be >= 0");
      break;
    case ExperimentKind::evolve: {
      detail::require_geometry(cfg, {"sphere", "torus"});
      plan.k_max = r.scalar<int>("k_max", cfg.geometry == "sphere" ? 16 : 8, [](int v) { return v >= 0 && v <= 256; },
                                 "must be in [0, 256]");
      plan.T = r.scalar<double>("T", q ? 0.25 : 1.0, nonneg_d, "must be >= 0");
      plan.dt = r.scalar<double>("dt", 1e-3, pos_d, "must be positive");
      plan.amplitude = r.scalar<double>("amplitude", 1.0, nonneg_d, "must be >= 0");
      plan.s = r.scalar<double>("s", 1.0, [](double) { return true; }, "");
      plan.stride = r.scalar<int>("stride", 100, pos_i, "must be >= 1");
      plan.scheme = r.choice("scheme", "galerkin", {"galerkin", "rotation"}) == "galerkin"
                        ? NonlinearScheme::galerkin_gauss
                        : NonlinearScheme::pointwise_rotation;
      break;
    }
    case ExperimentKind::xsb_check: {
      detail::require_geometry(cfg, {"sphere", "zoll"});
      auto& x = plan.xsb;
      x.trajectory.k_max = r.scalar<int>("k_max", 8, [](int v) { return v >= 0 && v <= 64; }, "must be in [0, 64]");
      x.trajectory.n_t = static_cast<std::size_t>(
          r.scalar<int>("n_t", 256, [](int v) { return v >= 8; }, "must be >= 8"));
      x.trajectory.t_win = r.scalar<double>("t_win", 2.0, pos_d, "must be positive");
      x.trials = r.scalar<int>("trials", q ? 12 : 50, pos_i, "must be >= 1");
      x.b_l4 = r.scalar<double>("b_l4", 0.4, [](double v) { return v > 0.25; }, "must exceed 1/4");
      x.b_linf = r.scalar<double>("b_linf", 0.6, [](double v) { return v > 0.5; }, "must exceed 1/2");
      x.b_equiv = r.scalar<double>("b_equiv", 0.6, [](double) { return true; }, "");
      x.alpha = r.scalar<int>("alpha", 2, [](int v) { return v >= 0; }, "must be >= 0");
      x.half_width = r.scalar<double>("half_width", 1.0, nonneg_d, "must be >= 0");
      if (zoll_separation_index(x.alpha, x.half_width) > 1)
        throw ConfigError("params.half_width", "Zoll clusters overlap beyond k = 0 for this alpha");
      break;
    }
    case ExperimentKind::stability_probe:
      detail::require_geometry(cfg, {"sphere"});
      plan.degrees = r.list<int>("degrees", q ? std::vector<int>{2, 4, 8} : std::vector<int>{4, 8, 16}, pos_i,
                                 "degrees must be >= 1");
      plan.s = r.scalar<double>("s", 0.2, [](double) { return true; }, "");
      plan.probe_a = r.scalar<double>("a", 0.5, nonneg_d, "must be >= 0");
      plan.probe_delta = r.scalar<double>("delta", 0.05, nonneg_d, "must be >= 0");
      if (plan.probe_a > 0.0 && plan.probe_delta >= plan.probe_a)
        throw ConfigError("params.delta", "must be smaller than a");
      plan.T = r.scalar<double>("T", q ? 0.05 : 0.2, nonneg_d, "must be >= 0");
      plan.dt = r.scalar<double>("dt", 1e-3, pos_d, "must be positive");
      plan.probe_k_extra = r.scalar<int>("k_extra", -1, [](int v) { return v >= -1; }, "must be >= 0 (or -1)");
      break;
  }
  r.reject_unknown(cfg.experiment);
  return plan;
}

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2, kExitThreshold = 3 };

struct RunOutcome {
  int exit_code = kExitOk;
  Summary summary;
  std::vector<std::filesystem::path> files;  // written outputs, summary last
};

namespace detail {

inline void fit_summary(Summary& s, const std::string& prefix, const PowerLawFit& fit) {
  s.set(prefix + ".slope", fit.slope);
  s.set(prefix + ".intercept", fit.intercept);
  s.set(prefix + ".r_squared", fit.r_squared);
}

inline void run_bilinear(const ExperimentPlan& plan, const std::filesystem::path& dir, RunOutcome& out) {
  BilinearOptions opt;
  opt.random_restarts = plan.restarts;
  const auto& c = plan.config;
  std::optional<SpectrumModel> zoll;
  if (c.geometry == "zoll")
    zoll = make_zoll_spectrum(plan.alpha, plan.half_width, plan.l_ratio * plan.degrees.back(), c.seed);
  const auto scan = bilinear_degree_scan(plan.degrees, plan.l_ratio, opt, c.seed, c.threads, zoll ? &*zoll : nullptr);
  const auto csv = dir / "bilinear.csv";
  CsvWriter w(csv, {"lambda", "mu", "constant", "iters", "residual", "restarts_used"});
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : scan.rows) {
    w.row(r.lambda, r.mu, r.constant, r.iterations, r.residual, r.restarts_used);
    pts.emplace_back(std::min(r.lambda, r.mu), r.constant);
  }
  out.files.push_back(csv);
  out.summary.set("rows", scan.rows.size());
  if (scan.rows.size() >= 4) {
    fit_summary(out.summary, "bilinear", scan.fit);
    out.summary.check("bilinear_slope_in_0.20_0.30", scan.fit.slope >= 0.20 && scan.fit.slope <= 0.30);
    const auto svg = dir / "bilinear.svg";
    write_loglog_svg(svg, "extremal bilinear constant", "min(lambda, mu)", "constant", pts, scan.fit, 0.25);
    out.files.push_back(svg);
  }
}

inline void run_sogge(const ExperimentPlan& plan, const std::filesystem::path& dir, RunOutcome& out) {
  const auto scan = sogge_highest_weight_scan(plan.degrees, plan.p, plan.config.threads);
  const auto csv = dir / "sogge.csv";
  CsvWriter w(csv, {"n", "p", "ratio", "closed_form", "rel_diff"});
  std::vector<std::pair<double, double>> pts;
  double worst = 0.0;
  for (const auto& r : scan.rows) {
    w.row(r.n, r.p, r.ratio, r.closed_form, r.relative_diff);
    pts.emplace_back(r.n, r.ratio);
    if (plan.p == 4.0) worst = std::max(worst, r.relative_diff);
  }
  out.files.push_back(csv);
  out.summary.set("p", plan.p);
  out.summary.set("sogge_exponent", sogge_exponent(plan.p));
  if (plan.p == 4.0) {
    out.summary.set("closed_form.max_rel_diff", worst);
    out.summary.check("closed_form_within_1e-8", worst <= 1e-8);
  }
  if (scan.rows.size() >= 4) {
    fit_summary(out.summary, "sogge", scan.fit);
    if (plan.p == 4.0) out.summary.check("sogge_slope_in_0.10_0.15", scan.fit.slope >= 0.10 && scan.fit.slope <= 0.15);
    const auto svg = dir / "sogge.svg";
    write_loglog_svg(svg, "L^p / L^2 ratio of highest-weight harmonics", "n", "ratio", pts, scan.fit,
                     sogge_exponent(plan.p));
    out.files.push_back(svg);
  }
}

inline void run_lattice(const ExperimentPlan& plan, const std::filesystem::path& dir, RunOutcome& out) {
  const auto& c = plan.config;
  std::vector<std::pair<double, double>> pts;
  PowerLawFit fit;
  const auto csv = dir / "lattice.csv";
  if (c.geometry == "sphere") {
    const auto scan = alpha_growth_scan(plan.counts, plan.l_ratio, c.threads);
    CsvWriter w(csv, {"N", "L", "tau_star", "max_count"});
    for (const auto& r : scan.rows) {
      w.row(static_cast<long long>(r.n), static_cast<long long>(r.l), static_cast<long long>(r.tau),
            static_cast<long long>(r.count));
      pts.emplace_back(double(r.n), double(r.count));
    }
    fit = scan.fit;
  } else {
    const auto scan = torus_growth_scan(plan.counts, c.threads);
    CsvWriter w(csv, {"A", "sup_count"});
    for (const auto& r : scan.rows) {
      w.row(static_cast<long long>(r.n), static_cast<long long>(r.count));
      pts.emplace_back(double(r.n), double(r.count));
    }
    fit = scan.fit;
  }
  out.files.push_back(csv);
  if (pts.size() >= 4) {
    fit_summary(out.summary, "lattice", fit);
    out.summary.check("lattice_slope_at_most_0.40", fit.slope <= 0.40);
    const auto svg = dir / "lattice.svg";
    write_loglog_svg(svg, c.geometry == "sphere" ? "max alpha count" : "sup torus pair count",
                     c.geometry == "sphere" ? "N" : "A", "count", pts, fit, std::nullopt);
    out.files.push_back(svg);
  }
}

inline void run_strichartz(const ExperimentPlan& plan, const std::filesystem::path& dir, RunOutcome& out) {
  const auto& c = plan.config;
  const bool sphere = c.geometry == "sphere";
  StrichartzScanOptions opt;
  opt.random_restarts = plan.restarts;
  opt.threads = c.threads;
  std::vector<std::pair<int, int>> bands;
  for (int n : plan.degrees) bands.emplace_back(n, plan.l_ratio * n);
  const auto scan = strichartz_exponent_scan(bands, sphere ? ScanGeometry::sphere : ScanGeometry::torus, opt, c.seed);
  const auto csv = dir / "strichartz.csv";
  CsvWriter w(csv, {"N", "L", "quotient", "rounds", "residual", "converged"});
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : scan.points) {
    w.row(p.n, p.l, p.quotient, p.rounds, p.residual, p.converged);
    pts.emplace_back(std::min(p.n, p.l), p.quotient);
  }
  out.files.push_back(csv);
  fit_summary(out.summary, "strichartz", scan.fit);
  if (sphere)
    out.summary.check("strichartz_slope_in_0.17_0.33", scan.fit.slope >= 0.17 && scan.fit.slope <= 0.33);
  else
    out.summary.check("strichartz_slope_at_most_0.15", scan.fit.slope <= 0.15);
  const auto svg = dir / "strichartz.svg";
  write_loglog_svg(svg, std::string("bilinear Strichartz quotient, ") + (sphere ? "sphere" : "torus"),
                   "min(N, L)", "quotient", pts, scan.fit, sphere ? 0.25 : 0.0);
  out.files.push_back(svg);
}

template <class Space>
void write_evolution(const ExperimentPlan& plan, const Space& space, const typename Space::Field& u0,
                     const std::filesystem::path& dir, RunOutcome& out) {
  const auto& c = plan.config;
  const auto spec = space.exact_spectrum();
  NlsOptions opt;
  opt.stride = plan.stride;
  opt.s = plan.s;
  opt.scheme = plan.scheme;
  const auto res = nls_evolve(space, u0, plan.T, plan.dt, spec, opt);
  const auto csv = dir / "trajectory.csv";
  {
    std::ofstream f(csv);
    if (!f) throw Error("cannot open " + csv.string());
    f << "# experiment=evolve geometry=" << c.geometry << " k_max=" << plan.k_max << " T=" << format_number(plan.T)
      << " dt=" << format_number(plan.dt) << " amplitude=" << format_number(plan.amplitude)
      << " s=" << format_number(plan.s) << " stride=" << plan.stride << " seed=" << c.seed
      << " scheme=" << (plan.scheme == NonlinearScheme::galerkin_gauss ? "galerkin" : "rotation") << '\n';
    f << "t,mass,energy,hs_norm\n";
    const auto& r = res.report;
    for (std::size_t i = 0; i < r.times.size(); ++i)
      f << format_number(r.times[i]) << ',' << format_number(r.mass[i]) << ',' << format_number(r.energy[i]) << ','
        << format_number(r.hs_norm[i]) << '\n';
  }
  out.files.push_back(csv);
  const auto snap = dir / "snapshot.txt";
  {
    std::ofstream f(snap);
    const auto& u = res.trajectory.fields.back();
    f << "#" << c.geometry << " k_max=" << plan.k_max << " t=" << format_number(res.report.times.back()) << '\n';
    if constexpr (std::is_same_v<typename Space::Field, HarmonicField>) {
      for (int k = 0; k <= u.k_max(); ++k)
        for (int m = -k; m <= k; ++m)
          f << k << ' ' << m << ' ' << format_number(u(k, m).real()) << ' ' << format_number(u(k, m).imag()) << '\n';
    } else {
      for (std::size_t i = 0; i < u.size(); ++i) {
        const auto [n1, n2] = u.mode(i);
        f << n1 << ' ' << n2 << ' ' << format_number(u[i].real()) << ' ' << format_number(u[i].imag()) << '\n';
      }
    }
  }
  out.files.push_back(snap);
  out.summary.set("samples", res.report.times.size());
  out.summary.set("max_mass_drift", res.report.max_mass_drift);
  out.summary.set("max_energy_drift", res.report.max_energy_drift);
  out.summary.check("mass_drift_at_most_1e-10", res.report.max_mass_drift <= 1e-10);
}

inline void run_evolve(const ExperimentPlan& plan, const std::filesystem::path& dir, RunOutcome& out) {
  std::mt19937_64 rng(plan.config.seed);
  if (plan.config.geometry == "sphere") {
    const SphereSpace space(plan.k_max);
    auto u0 = random_field(0, plan.k_max, rng, plan.k_max);
    u0 *= plan.amplitude;
    write_evolution(plan, space, u0, dir, out);
  } else {
    const TorusSpace space(plan.k_max);
    TorusField u0(plan.k_max);
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t i = 0; i < u0.size(); ++i) {
      const double re = g(rng);
      const double im = g(rng);
      u0[i] = {re, im};
    }
    u0 *= plan.amplitude / u0.norm();
    write_evolution(plan, space, u0, dir, out);
  }
}

inline void run_xsb(const ExperimentPlan& plan, const std::filesystem::path& dir, RunOutcome& out) {
  const auto rep = run_xsb_suite(plan.xsb, plan.config.seed);
  const auto csv = dir / "xsb.csv";
  CsvWriter w(csv, {"trial", "l2_space_time", "xsb_00", "l4t_l2x", "xsb_l4", "linf_t_l2x", "xsb_linf", "equiv_ratio",
                    "equiv_bound", "equiv_ratio_00"});
  for (const auto& r : rep.rows)
    w.row(r.trial, r.l2_space_time, r.xsb_00, r.l4t_l2x, r.xsb_l4, r.linf_t_l2x, r.xsb_linf, r.equiv_ratio,
          r.equiv_bound, r.equiv_ratio_00);
  out.files.push_back(csv);
  auto& s = out.summary;
  s.set("trials", rep.rows.size());
  s.set("xsb00_max_rel_diff", rep.max_l2_rel_diff);
  s.set("free_mode_spread", rep.free_mode_spread);
  s.set("embedding_l4.constant", rep.l4.constant);
  s.set("embedding_l4.refined_worst", rep.l4.refined_worst);
  s.set("embedding_linf.constant", rep.linf.constant);
  s.set("embedding_linf.refined_worst", rep.linf.refined_worst);
  s.set("equivalence.max_excess", rep.max_equiv_excess);
  s.set("equivalence.max_dev_00", rep.max_equiv_00_dev);
  s.set("nyquist_ok", rep.nyquist_ok);
  s.check("xsb00_equals_l2_1e-8", rep.max_l2_rel_diff <= 1e-8);
  s.check("free_mode_k_independent_1e-6", rep.free_mode_spread <= 1e-6);
  s.check("embedding_l4_envelope", rep.l4.holds);
  s.check("embedding_linf_envelope", rep.linf.holds);
  s.check("equivalence_within_bound", rep.max_equiv_excess <= 1.0);
  s.check("equivalence_00_is_1", rep.max_equiv_00_dev <= 1e-10);
}

inline void run_probe(const ExperimentPlan& plan, const std::filesystem::path& dir, RunOutcome& out) {
  std::vector<double> ratios(plan.degrees.size());
  parallel_for(plan.degrees.size(), plan.config.threads, [&](std::size_t i) {
    StabilityProbeOptions o;
    if (plan.probe_k_extra >= 0) o.k_max = plan.degrees[i] + plan.probe_k_extra;
    ratios[i] = flow_stability_probe(plan.degrees[i], plan.s, plan.probe_a, plan.probe_delta, plan.T, plan.dt, o);
  });
  const auto csv = dir / "probe.csv";
  CsvWriter w(csv, {"n", "ratio"});
  for (std::size_t i = 0; i < ratios.size(); ++i) w.row(plan.degrees[i], ratios[i]);
  out.files.push_back(csv);
  out.summary.set("gated", false);
  out.summary.set("ratio_first", ratios.front());
  out.summary.set("ratio_last", ratios.back());
}

}  // namespace detail

/// Runs a validated plan into `dir` (created if needed). Runtime failures leave the
/// finished rows on disk and a summary with status=failed.
inline RunOutcome run(const ExperimentPlan& plan, const std::filesystem::path& dir) {
  RunOutcome out;
  std::filesystem::create_directories(dir);
  const auto& c = plan.config;
  out.summary.set("experiment", c.experiment);
  out.summary.set("geometry", c.geometry);
  out.summary.set("seed", static_cast<std::size_t>(c.seed));
  out.summary.set("quick", c.quick);
  try {
    switch (plan.kind) {
      case ExperimentKind::bilinear_scan: detail::run_bilinear(plan, dir, out); break;
      case ExperimentKind::sogge_scan: detail::run_sogge(plan, dir, out); break;
      case ExperimentKind::lattice_scan: detail::run_lattice(plan, dir, out); break;
      case ExperimentKind::strichartz_scan: detail::run_strichartz(plan, dir, out); break;
      case ExperimentKind::evolve: detail::run_evolve(plan, dir, out); break;
      case ExperimentKind::xsb_check: detail::run_xsb(plan, dir, out); break;
      case ExperimentKind::stability_probe: detail::run_probe(plan, dir, out); break;
    }
    out.summary.set("thresholds", std::string(out.summary.all_pass() ? "pass" : "fail"));
    out.summary.set("status", std::string("ok"));
  } catch (const std::exception& e) {
    out.summary.set("status", std::string("failed"));
    out.summary.set("error", std::string(e.what()));
    out.exit_code = kExitRuntime;
  }
  const auto sp = dir / "summary.txt";
  out.summary.write(sp);
  out.files.push_back(sp);
  return out;
}

inline bool files_identical(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  return std::equal(std::istreambuf_iterator<char>(fa), std::istreambuf_iterator<char>(),
                    std::istreambuf_iterator<char>(fb), std::istreambuf_iterator<char>());
}

/// Runs twice (second pass into dir/recheck), compares every output byte for byte and
/// turns threshold or determinism failures into kExitThreshold.
inline RunOutcome run_checked(const ExperimentPlan& plan, const std::filesystem::path& dir) {
  RunOutcome first = run(plan, dir);
  if (first.exit_code != kExitOk) return first;
  const auto again_dir = dir / "recheck";
  std::filesystem::remove_all(again_dir);
  const RunOutcome second = run(plan, again_dir);
  bool same = second.exit_code == kExitOk && second.files.size() == first.files.size();
  for (std::size_t i = 0; same && i < first.files.size(); ++i)
    same = files_identical(first.files[i], second.files[i]);
  std::filesystem::remove_all(again_dir);
  first.summary.check("determinism", same);
  first.summary.set("thresholds", std::string(first.summary.all_pass() ? "pass" : "fail"));
  first.summary.write(first.files.back());
  if (!first.summary.all_pass()) first.exit_code = kExitThreshold;
  return first;
}

}  // namespace bispec
