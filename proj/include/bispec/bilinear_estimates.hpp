#pragma once

// Bilinear product norms on the sphere, the extremal constant
//   sup ||chi_lambda f * chi_mu g||_2 / (||f||_2 ||g||_2),
// Sogge L^p ratios and the degree-orthogonality check for quadruple products.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "bispec/error.hpp"
#include "bispec/fit.hpp"
#include "bispec/harmonic_basis.hpp"
#include "bispec/parallel.hpp"
#include "bispec/power_iteration.hpp"
#include "bispec/spectral_ops.hpp"

namespace bispec {

struct BilinearScanResult {
  double lambda = 0.0;
  double mu = 0.0;
  double constant = 0.0;
  HarmonicField maximizer_f;
  HarmonicField maximizer_g;
  int iterations = 0;  // alternation rounds of the winning start
  double residual = 0.0;
  bool converged = false;
  int restarts_used = 0;
  std::vector<double> history;  // quotient after each half-step, winning start
};

struct BilinearOptions {
  AlternatingOptions alternation{};
  int random_restarts = 3;
  bool warm_start = true;  // extra start at the highest-weight pair
};

/// The bilinear map (f, g) -> (W_f f)(W_g g) on a grid exact for its normal operators.
class BilinearProblem {
 public:
  BilinearProblem(const SpectralWindow& wf, const SpectralWindow& wg, const SpectrumModel& spec, int k_max)
      : k_max_(k_max) {
    spec.check_covers(k_max);
    deg_f_ = window_support(wf, spec, k_max);
    deg_g_ = window_support(wg, spec, k_max);
    if (deg_f_.empty() || deg_g_.empty()) throw InvalidParams("window passband is empty below k_max");
    weight_f_.resize(HarmonicField::count(k_max));
    weight_g_.resize(HarmonicField::count(k_max));
    for (std::size_t i = 0; i < weight_f_.size(); ++i) {
      weight_f_[i] = wf.at_eigenvalue(spec[i]);
      weight_g_[i] = wg.at_eigenvalue(spec[i]);
    }
    const int hi = std::max(deg_f_.back(), deg_g_.back());
    transform_ = SphereTransform(build_product_grid(2 * (deg_f_.back() + deg_g_.back())), hi);
  }

  const std::vector<int>& degrees_f() const { return deg_f_; }
  const std::vector<int>& degrees_g() const { return deg_g_; }
  const SphereTransform& transform() const { return transform_; }

  HarmonicField mask_f(HarmonicField f) const { return masked(std::move(f), weight_f_, deg_f_); }
  HarmonicField mask_g(HarmonicField g) const { return masked(std::move(g), weight_g_, deg_g_); }

  GridValues values_f(const HarmonicField& f) const {
    return transform_.synthesize(weighted(f, weight_f_), deg_f_.front(), deg_f_.back());
  }
  GridValues values_g(const HarmonicField& g) const {
    return transform_.synthesize(weighted(g, weight_g_), deg_g_.front(), deg_g_.back());
  }

  double quotient(const HarmonicField& f, const HarmonicField& g) const {
    const auto a = values_f(f);
    const auto b = values_g(g);
    const auto& grid = transform_.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weight(i) * std::norm(a[i] * b[i]);
    return std::sqrt(s) / (f.norm() * g.norm());
  }

 private:
  HarmonicField weighted(const HarmonicField& f, const std::vector<double>& w) const {
    HarmonicField out(k_max_);
    const std::size_t n = std::min(f.size(), out.size());
    for (std::size_t i = 0; i < n; ++i) out[i] = w[i] * f[i];
    return out;
  }

  HarmonicField masked(HarmonicField f, const std::vector<double>& w, const std::vector<int>& deg) const {
    f = f.resized(k_max_);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const int k = HarmonicField::degree_of(i);
      if (w[i] == 0.0 || k < deg.front() || k > deg.back()) f[i] = 0.0;
    }
    return f;
  }

  auto normal_op(GridValues other, const std::vector<double>& w, const std::vector<int>& deg) const {
    std::vector<double> abs2(other.size());
    for (std::size_t i = 0; i < other.size(); ++i) abs2[i] = std::norm(other[i]);
    return [this, abs2 = std::move(abs2), &w, &deg](const HarmonicField& x) {
      GridValues v = transform_.synthesize(weighted(x, w), deg.front(), deg.back());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] *= abs2[i];
      HarmonicField y = transform_.analyze(std::move(v), deg.front(), deg.back(), k_max_);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] *= w[i];
      return y;
    };
  }

 public:
  auto normal_f(const HarmonicField& g) const { return normal_op(values_g(g), weight_f_, deg_f_); }
  auto normal_g(const HarmonicField& f) const { return normal_op(values_f(f), weight_g_, deg_g_); }

 private:

  int k_max_;
  std::vector<int> deg_f_, deg_g_;
  std::vector<double> weight_f_, weight_g_;
  SphereTransform transform_;
};

/// Degree in the passband whose window weight is largest (ties: lowest degree).
inline int peak_degree(const SpectralWindow& w, const SpectrumModel& spec, int k_max) {
  int best = -1;
  double bw = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    const double v = w.at_eigenvalue(spec.eigenvalue(k, 0));
    if (v > bw) bw = v, best = k;
  }
  return best;
}

/// sup over f, g of ||(W_f f)(W_g g)||_2 / (||f|| ||g||), by alternating top singular
/// vectors from a highest-weight warm start plus seeded random restarts. The best
/// start wins; f and g are returned unit-normalized and masked to the passbands.
inline BilinearScanResult extremal_bilinear_constant(const SpectralWindow& wf, const SpectralWindow& wg,
                                                     const SpectrumModel& spec, int k_max,
                                                     const BilinearOptions& opt = {}, std::uint64_t seed = 0) {
  const BilinearProblem problem(wf, wg, spec, k_max);
  std::mt19937_64 rng(seed);

  std::vector<std::pair<HarmonicField, HarmonicField>> starts;
  if (opt.warm_start) {
    const int n = peak_degree(wf, spec, k_max);
    const int l = peak_degree(wg, spec, k_max);
    if (n >= 0 && l >= 0)
      starts.emplace_back(problem.mask_f(make_highest_weight(n, k_max)),
                          problem.mask_g(make_highest_weight(l, k_max)));
  }
  for (int r = 0; r < opt.random_restarts; ++r) {
    const auto& df = problem.degrees_f();
    const auto& dg = problem.degrees_g();
    auto f = problem.mask_f(random_field(df.front(), df.back(), rng, k_max));
    auto g = problem.mask_g(random_field(dg.front(), dg.back(), rng, k_max));
    starts.emplace_back(std::move(f), std::move(g));
  }

  BilinearScanResult best;
  best.lambda = wf.center();
  best.mu = wg.center();
  best.constant = -1.0;
  for (auto& [f0, g0] : starts) {
    if (f0.norm() == 0.0 || g0.norm() == 0.0) continue;
    auto res = alternating_maximize(
        std::move(f0), std::move(g0), [&](const HarmonicField& g) { return problem.normal_f(g); },
        [&](const HarmonicField& f) { return problem.normal_g(f); }, opt.alternation);
    ++best.restarts_used;
    if (res.value > best.constant) {
      best.constant = res.value;
      best.maximizer_f = std::move(res.f);
      best.maximizer_g = std::move(res.g);
      best.iterations = res.rounds;
      best.residual = res.residual;
      best.converged = res.converged;
      best.history = std::move(res.history);
    }
  }
  if (best.restarts_used == 0) throw InvalidParams("no admissible starting pair in the passbands");
  return best;
}

/// One-degree windows on the exact sphere spectrum: the sup over f in H_n, g in H_l.
inline BilinearScanResult extremal_bilinear_constant_degrees(int n, int l, const BilinearOptions& opt = {},
                                                             std::uint64_t seed = 0) {
  require(n >= 0 && l >= 0, "degrees must be nonnegative");
  const int k_max = std::max(n, l);
  auto res = extremal_bilinear_constant(SpectralWindow::sphere_degree(n), SpectralWindow::sphere_degree(l),
                                        SpectrumModel::sphere_exact(k_max), k_max, opt, seed);
  return res;
}

/// ||f g||_{L^2(S^2)} by quadrature; the grid must integrate |f g|^2 exactly.
inline double product_l2(const HarmonicField& f, const HarmonicField& g, const SphereGrid& grid) {
  const int need = 2 * (f.k_max() + g.k_max());
  if (grid.exact_degree() < need)
    throw ResolutionError("product_l2 needs exact degree " + std::to_string(need) + ", grid has " +
                          std::to_string(grid.exact_degree()));
  const SphereTransform t(grid, std::max(f.k_max(), g.k_max()));
  const auto a = t.synthesize(f);
  const auto b = t.synthesize(g);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weight(i) * std::norm(a[i] * b[i]);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Sogge exponents
// ---------------------------------------------------------------------------

/// s(p) = 1/4 - 1/(2p) on [2, 6], 1/2 - 2/p on [6, inf].
inline double sogge_exponent(double p) {
  require(p >= 2.0, "Sogge exponent defined for p >= 2");
  if (std::isinf(p)) return 0.5;
  return p <= 6.0 ? 0.25 - 0.5 / p : 0.5 - 2.0 / p;
}

struct SoggeExponentTable {
  std::map<double, double> values;
  static SoggeExponentTable standard() {
    SoggeExponentTable t;
    for (double p : {2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 12.0, std::numeric_limits<double>::infinity()})
      t.values[p] = sogge_exponent(p);
    return t;
  }
};

/// Pointwise value of a field at (theta, phi), by direct summation.
inline cplx evaluate_field(const HarmonicField& f, double theta, double phi) {
  const double c = std::cos(theta);
  const LegendreTable t(std::span<const double>(&c, 1), f.k_max());
  cplx s{};
  for (int m = -f.k_max(); m <= f.k_max(); ++m) {
    const int am = std::abs(m);
    const double sgn = (m < 0 && am % 2 == 1) ? -1.0 : 1.0;
    cplx col{};
    for (int k = am; k <= f.k_max(); ++k) col += f(k, m) * t(k, am, 0);
    s += sgn * col * std::polar(1.0, m * phi);
  }
  return s;
}

/// ||f||_{L^p} / ||f||_{L^2}. For p = infinity: grid maximum refined by a local
/// pattern search on the exact field.
inline double sogge_ratio(const HarmonicField& f, double p, const SphereGrid& grid) {
  require(p >= 2.0, "sogge_ratio needs p >= 2");
  const double l2 = f.norm();
  require(l2 > 0.0, "sogge_ratio needs a nonzero field");
  if (grid.n_lon < std::size_t(2 * f.k_max() + 1))
    throw ResolutionError("grid cannot represent the field");
  const auto v = SphereTransform(grid, f.k_max()).synthesize(f);
  if (std::isinf(p)) {
    std::size_t arg = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    auto [theta, phi] = grid.node(arg);
    double best = std::abs(evaluate_field(f, theta, phi));
    double step = kPi / static_cast<double>(grid.n_lat);
    while (step > 1e-10) {
      bool moved = false;
      for (auto [dt, dp] : std::array<std::pair<double, double>, 4>{{{step, 0}, {-step, 0}, {0, step}, {0, -step}}}) {
        const double t2 = std::clamp(theta + dt, 0.0, kPi);
        const double val = std::abs(evaluate_field(f, t2, phi + dp));
        if (val > best) {
          best = val, theta = t2, phi += dp, moved = true;
          break;
        }
      }
      if (!moved) step *= 0.5;
    }
    return best / l2;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += grid.weight(i) * std::pow(std::abs(v[i]), p);
  return std::pow(s, 1.0 / p) / l2;
}

// ---------------------------------------------------------------------------
// Quadruple products
// ---------------------------------------------------------------------------

/// max over seeded random unit w_j in degree k_j of |int prod_j P_{k_j} w_j|.
inline double quadruple_orthogonality_check(const std::array<int, 4>& degrees, int trials, std::uint64_t seed) {
  require(trials >= 1, "need at least one trial");
  for (int k : degrees) require(k >= 0, "degrees must be nonnegative");
  const int total = degrees[0] + degrees[1] + degrees[2] + degrees[3];
  const int k_hi = *std::max_element(degrees.begin(), degrees.end());
  const SphereTransform t(build_product_grid(std::max(total, 2 * k_hi)), k_hi);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    std::array<GridValues, 4> vals;
    for (int j = 0; j < 4; ++j) vals[j] = t.synthesize(random_field(degrees[j], degrees[j], rng, k_hi));
    const auto q = integrate_product(vals, t.grid(), total);
    worst = std::max(worst, std::abs(q.value));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Scans
// ---------------------------------------------------------------------------

struct BilinearScan {
  std::vector<BilinearScanResult> rows;  // ordered as the input degrees
  PowerLawFit fit;                        // log constant against log min(n, l)
};

/// Window around Zoll cluster k in sqrt(mu): [sqrt(c - E), sqrt(c + E)], c = (k + alpha/4)^2.
inline SpectralWindow zoll_cluster_window(const SpectrumModel& spec, int k) {
  const double c = spec.cluster_center(k);
  const double e = spec.cluster_half_width();
  return SpectralWindow::interval(std::sqrt(std::max(0.0, c - e)), std::sqrt(c + e));
}

/// Extremal constants for (n, l_ratio n), n over `degrees`. Zoll geometry uses cluster
/// windows on a synthetic spectrum seeded with `seed`; the sphere uses one-degree windows.
inline BilinearScan bilinear_degree_scan(const std::vector<int>& degrees, int l_ratio, const BilinearOptions& opt,
                                         std::uint64_t seed, unsigned threads, const SpectrumModel* zoll = nullptr) {
  require(l_ratio >= 1, "l_ratio must be >= 1");
  for (int n : degrees) require(n >= 1, "scan degrees must be >= 1");
  BilinearScan out;
  out.rows.resize(degrees.size());
  parallel_for(degrees.size(), threads, [&](std::size_t i) {
    const int n = degrees[i], l = l_ratio * degrees[i];
    if (zoll == nullptr) {
      out.rows[i] = extremal_bilinear_constant_degrees(n, l, opt, seed + i);
    } else {
      zoll->check_covers(l);
      out.rows[i] = extremal_bilinear_constant(zoll_cluster_window(*zoll, n), zoll_cluster_window(*zoll, l), *zoll,
                                               l, opt, seed + i);
    }
    out.rows[i].lambda = n;
    out.rows[i].mu = l;
  });
  if (degrees.size() >= 4) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : out.rows) pts.emplace_back(std::min(r.lambda, r.mu), r.constant);
    out.fit = fit_growth_exponent(pts);
  }
  return out;
}

/// ||phi_n||_{L^4} / ||phi_n||_{L^2} for phi_n = (x1 + i x2)^n, from the closed-form
/// norms: ||phi_n||_4^4 = ||phi_{2n}||_2^2.
inline double highest_weight_l4_ratio(int n) {
  require(n >= 0, "degree must be nonnegative");
  return std::pow(highest_weight_norm_squared(2 * n), 0.25) / std::sqrt(highest_weight_norm_squared(n));
}

/// Grid for L^p norms of degree-n fields: exact for even integer p, degree 4n otherwise.
inline SphereGrid sogge_grid(int n, double p) {
  const bool even = std::isfinite(p) && p == std::floor(p) && static_cast<long>(p) % 2 == 0;
  return build_product_grid(even ? static_cast<int>(p) * n : std::max(4 * n, 2 * n + 2));
}

struct SoggeRow {
  int n = 0;
  double p = 4.0;
  double ratio = 0.0;
  double closed_form = std::numeric_limits<double>::quiet_NaN();  // p = 4 only
  double relative_diff = std::numeric_limits<double>::quiet_NaN();
};

struct SoggeScan {
  std::vector<SoggeRow> rows;
  PowerLawFit fit;  // log ratio against log n
};

inline SoggeScan sogge_highest_weight_scan(const std::vector<int>& degrees, double p, unsigned threads = 1) {
  SoggeScan out;
  out.rows.resize(degrees.size());
  parallel_for(degrees.size(), threads, [&](std::size_t i) {
    const int n = degrees[i];
    require(n >= 1, "scan degrees must be >= 1");
    SoggeRow r;
    r.n = n;
    r.p = p;
    r.ratio = sogge_ratio(make_highest_weight(n), p, sogge_grid(n, p));
    if (p == 4.0) {
      r.closed_form = highest_weight_l4_ratio(n);
      r.relative_diff = std::abs(r.ratio - r.closed_form) / r.closed_form;
    }
    out.rows[i] = r;
  });
  if (degrees.size() >= 4) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : out.rows) pts.emplace_back(r.n, r.ratio);
    out.fit = fit_growth_exponent(pts);
  }
  return out;
}

}  // namespace bispec
