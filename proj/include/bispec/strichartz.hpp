#pragma once

// Bilinear Strichartz functionals
//   || e^{-itA} u0 * e^{-itA} v0 ||_{L^2((0,T) x M)}
// by time quadrature, by the exact tau-sum on the sphere (T = 2 pi), and the
// maximized quotient over dyadic bands with its fitted growth exponent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bispec/error.hpp"
#include "bispec/evolution.hpp"
#include "bispec/fit.hpp"
#include "bispec/harmonic_basis.hpp"
#include "bispec/parallel.hpp"
#include "bispec/power_iteration.hpp"
#include "bispec/spectral_ops.hpp"

namespace bispec {

enum class StrichartzMethod { quadrature, parseval_exact, maximized };

inline const char* to_string(StrichartzMethod m) {
  switch (m) {
    case StrichartzMethod::quadrature: return "quadrature";
    case StrichartzMethod::parseval_exact: return "parseval-exact";
    case StrichartzMethod::maximized: return "maximized";
  }
  return "?";
}

struct StrichartzSample {
  double n = 0.0;  // band parameters (degree bounds when called on raw fields)
  double l = 0.0;
  double value = 0.0;
  StrichartzMethod method = StrichartzMethod::quadrature;
  int nt = 0;                    // trapezoid intervals used
  double relative_change = 0.0;  // |value(2 nt) - value(nt)| / value(2 nt)
  bool under_resolved = false;   // relative_change > 1e-6
};

inline constexpr double kTimeResolutionTol = 1e-6;

namespace detail {

/// Composite trapezoid of g on [0, T] with nt and 2 nt intervals; the coarse nodes are reused.
template <class G>
StrichartzSample trapezoid_doubled(G&& g, double T, int nt) {
  require(nt >= 1, "need at least one time interval");
  const double h = T / nt;
  double coarse = 0.5 * (g(0.0) + g(T));
  for (int j = 1; j < nt; ++j) coarse += g(h * j);
  double mid = 0.0;
  for (int j = 0; j < nt; ++j) mid += g(h * (j + 0.5));
  const double v1 = std::sqrt(std::max(0.0, h * coarse));
  const double v2 = std::sqrt(std::max(0.0, 0.5 * h * (coarse + mid)));
  StrichartzSample s;
  s.value = v1;
  s.nt = nt;
  s.relative_change = v2 > 0.0 ? std::abs(v2 - v1) / v2 : std::abs(v2 - v1);
  s.under_resolved = s.relative_change > kTimeResolutionTol;
  return s;
}

inline double max_eigenvalue(const SpectrumModel& spec, std::size_t count) {
  double top = 0.0;
  for (std::size_t i = 0; i < count; ++i) top = std::max(top, std::abs(spec[i]));
  return top;
}

}  // namespace detail

/// Time quadrature on the sphere; grid must integrate |u v|^2 exactly.
/// nt <= 0 selects default_time_nodes(max mu_u + max mu_v, T).
inline StrichartzSample bilinear_strichartz(const HarmonicField& u0, const HarmonicField& v0, double T, int nt,
                                            const SpectrumModel& spec, const SphereGrid& grid) {
  require(T > 0.0, "T must be positive");
  spec.check_covers(std::max(u0.k_max(), v0.k_max()));
  const int need = 2 * (u0.k_max() + v0.k_max());
  if (grid.exact_degree() < need)
    throw ResolutionError("product grid must be exact to degree " + std::to_string(need));
  if (nt <= 0)
    nt = default_time_nodes(detail::max_eigenvalue(spec, u0.size()) + detail::max_eigenvalue(spec, v0.size()), T);
  const SphereTransform tr(grid, std::max(u0.k_max(), v0.k_max()));
  const auto w = grid.weights();
  auto g = [&](double t) {
    const auto a = tr.synthesize(propagate(u0, t, spec));
    const auto b = tr.synthesize(propagate(v0, t, spec));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * std::norm(a[i] * b[i]);
    return s;
  };
  auto res = detail::trapezoid_doubled(g, T, nt);
  res.n = u0.k_max();
  res.l = v0.k_max();
  return res;
}

/// Time quadrature on the unit torus; grid side must exceed 2 (A_u + A_v).
inline StrichartzSample bilinear_strichartz(const TorusField& u0, const TorusField& v0, double T, int nt,
                                            const SpectrumModel& spec, const TorusGrid& grid) {
  require(T > 0.0, "T must be positive");
  if (!spec.is_torus() || spec.range() < std::max(u0.half_width(), v0.half_width()))
    throw DimensionMismatch("torus data needs a torus spectrum covering both fields");
  if (static_cast<int>(grid.n) < 2 * (u0.half_width() + v0.half_width()) + 1)
    throw ResolutionError("torus grid too coarse for the product");
  const auto lift = [&](const TorusField& f) {
    TorusField out(spec.range());
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto [n1, n2] = f.mode(i);
      out(n1, n2) = f[i];
    }
    return out;
  };
  const TorusField u = lift(u0), v = lift(v0);
  if (nt <= 0) nt = default_time_nodes(2.0 * detail::max_eigenvalue(spec, spec.size()), T);
  const double w = grid.weight();
  auto g = [&](double t) {
    const auto a = torus_synthesize(propagate(u, t, spec), grid);
    const auto b = torus_synthesize(propagate(v, t, spec), grid);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] * b[i]);
    return w * s;
  };
  auto res = detail::trapezoid_doubled(g, T, nt);
  res.n = u0.half_width();
  res.l = v0.half_width();
  return res;
}

/// 2 pi sum_tau || sum_{k(k+1)+l(l+1)=tau} P_k u0 P_l v0 ||^2, square-rooted.
inline StrichartzSample strichartz_parseval_sphere(const HarmonicField& u0, const HarmonicField& v0) {
  const int ku = u0.k_max(), kv = v0.k_max();
  const SphereTransform tr(build_product_grid(2 * (ku + kv)), std::max(ku, kv));
  auto degree_grids = [&](const HarmonicField& f) {
    std::vector<std::pair<int, GridValues>> out;
    for (int k = 0; k <= f.k_max(); ++k) {
      bool any = false;
      for (int m = -k; m <= k && !any; ++m) any = f(k, m) != cplx{};
      if (any) out.emplace_back(k, tr.synthesize(f, k, k));
    }
    return out;
  };
  const auto us = degree_grids(u0);
  const auto vs = degree_grids(v0);
  std::map<long long, std::vector<std::pair<std::size_t, std::size_t>>> groups;
  for (std::size_t i = 0; i < us.size(); ++i)
    for (std::size_t j = 0; j < vs.size(); ++j) {
      const long long k = us[i].first, l = vs[j].first;
      groups[k * (k + 1) + l * (l + 1)].emplace_back(i, j);
    }
  const auto w = tr.grid().weights();
  double total = 0.0;
  GridValues f(tr.grid().size());
  for (const auto& [tau, pairs] : groups) {
    std::fill(f.begin(), f.end(), cplx{});
    for (const auto& [i, j] : pairs) {
      const auto& a = us[i].second;
      const auto& b = vs[j].second;
      for (std::size_t p = 0; p < f.size(); ++p) f[p] += a[p] * b[p];
    }
    for (std::size_t p = 0; p < f.size(); ++p) total += w[p] * std::norm(f[p]);
  }
  StrichartzSample s;
  s.n = ku;
  s.l = kv;
  s.value = std::sqrt(2.0 * kPi * total);
  s.method = StrichartzMethod::parseval_exact;
  return s;
}

// ---------------------------------------------------------------------------
// Maximized quotient over bands
// ---------------------------------------------------------------------------

/// u in the dyadic sphere band N, v in band L; the functional is the tau-sum above
/// (T = 2 pi). Pairs (k, l) sharing tau couple; all others decouple into |V_l|^2.
class SphereStrichartzProblem {
 public:
  SphereStrichartzProblem(double n, double l) {
    deg_[0] = dyadic_degrees(n);
    deg_[1] = dyadic_degrees(l);
    if (deg_[0].empty() || deg_[1].empty()) throw InvalidParams("empty dyadic band");
    kmax_[0] = deg_[0].back();
    kmax_[1] = deg_[1].back();
    tr_ = SphereTransform(build_product_grid(2 * (kmax_[0] + kmax_[1])), std::max(kmax_[0], kmax_[1]));
    std::map<long long, std::vector<std::pair<int, int>>> by_tau;
    for (int i = 0; i < int(deg_[0].size()); ++i)
      for (int j = 0; j < int(deg_[1].size()); ++j) {
        const long long k = deg_[0][i], q = deg_[1][j];
        by_tau[k * (k + 1) + q * (q + 1)].emplace_back(i, j);
      }
    for (auto& [tau, pairs] : by_tau)
      if (pairs.size() > 1) coupled_.push_back(std::move(pairs));
    weights_ = tr_.grid().weights();
  }

  const std::vector<int>& degrees(int side) const { return deg_[side]; }
  std::size_t coupled_groups() const { return coupled_.size(); }

  HarmonicField mask(int side, HarmonicField f) const {
    f = f.resized(kmax_[side]);
    for (int k = 0; k < deg_[side].front(); ++k)
      for (int m = -k; m <= k; ++m) f(k, m) = 0.0;
    return f;
  }
  HarmonicField warm_start(int side) const { return make_highest_weight(kmax_[side], kmax_[side]); }
  template <class Rng>
  HarmonicField random_start(int side, Rng& rng) const {
    return random_field(deg_[side].front(), deg_[side].back(), rng, kmax_[side]);
  }

  /// x |-> B^* B x on `side`, the other argument fixed to `other`.
  auto normal(int side, const HarmonicField& other) const {
    const int os = 1 - side;
    std::vector<GridValues> og;
    og.reserve(deg_[os].size());
    GridValues s(tr_.grid().size(), cplx{});
    for (int k : deg_[os]) {
      og.push_back(tr_.synthesize(other, k, k));
      const auto& g = og.back();
      for (std::size_t p = 0; p < s.size(); ++p) s[p] += std::norm(g[p]);
    }
    return [this, side, og = std::move(og), s = std::move(s)](const HarmonicField& x) {
      const auto& d = deg_[side];
      std::vector<GridValues> xg(d.size());
      std::vector<GridValues> acc(d.size());
      for (std::size_t a = 0; a < d.size(); ++a) {
        xg[a] = tr_.synthesize(x, d[a], d[a]);
        acc[a].resize(xg[a].size());
        for (std::size_t p = 0; p < s.size(); ++p) acc[a][p] = s[p] * xg[a][p];
      }
      GridValues f(s.size());
      for (const auto& grp : coupled_) {
        std::fill(f.begin(), f.end(), cplx{});
        for (const auto& [i, j] : grp) {
          const auto& xa = xg[side == 0 ? i : j];
          const auto& ob = og[side == 0 ? j : i];
          for (std::size_t p = 0; p < f.size(); ++p) f[p] += xa[p] * ob[p];
        }
        for (const auto& [i, j] : grp) {
          const int a = side == 0 ? i : j;
          const auto& xa = xg[a];
          const auto& ob = og[side == 0 ? j : i];
          auto& out = acc[a];
          for (std::size_t p = 0; p < f.size(); ++p) out[p] += std::conj(ob[p]) * (f[p] - xa[p] * ob[p]);
        }
      }
      HarmonicField y(kmax_[side]);
      for (std::size_t a = 0; a < d.size(); ++a) {
        const auto part = tr_.analyze(std::move(acc[a]), d[a], d[a], kmax_[side]);
        for (int m = -d[a]; m <= d[a]; ++m) y(d[a], m) = 2.0 * kPi * part(d[a], m);
      }
      return y;
    };
  }

 private:
  std::vector<int> deg_[2];
  int kmax_[2] = {0, 0};
  SphereTransform tr_;
  std::vector<std::vector<std::pair<int, int>>> coupled_;
  std::vector<double> weights_;
};

/// u in the torus shell N <= |n|_inf < 2N, v in L <= |n|_inf < 2L, time interval (0, 1).
/// The functional is sum over classes (tau, p) of |sum_{q+r=p, |q|^2+|r|^2=tau} u_q v_r|^2.
class TorusStrichartzProblem {
 public:
  TorusStrichartzProblem(int n, int l) {
    require(n >= 1 && l >= 1, "torus bands need N, L >= 1");
    a_[0] = 2 * n - 1;
    a_[1] = 2 * l - 1;
    for (int side = 0; side < 2; ++side) {
      const int lo = side == 0 ? n : l;
      const TorusField layout(a_[side]);
      for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto [n1, n2] = layout.mode(i);
        if (std::max(std::abs(n1), std::abs(n2)) >= lo) modes_[side].push_back(static_cast<std::uint32_t>(i));
      }
    }
    const TorusField lu(a_[0]), lv(a_[1]);
    const std::int64_t pw = 2 * (a_[0] + a_[1]) + 1;
    struct Entry {
      std::uint64_t key;
      std::uint32_t q, r;
    };
    std::vector<Entry> entries;
    entries.reserve(modes_[0].size() * modes_[1].size());
    for (std::uint32_t q : modes_[0]) {
      const auto [q1, q2] = lu.mode(q);
      for (std::uint32_t r : modes_[1]) {
        const auto [r1, r2] = lv.mode(r);
        const std::int64_t tau = q1 * q1 + q2 * q2 + r1 * r1 + r2 * r2;
        const std::int64_t p1 = q1 + r1 + (a_[0] + a_[1]), p2 = q2 + r2 + (a_[0] + a_[1]);
        entries.push_back({static_cast<std::uint64_t>((tau * pw + p1) * pw + p2), q, r});
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
      return x.key != y.key ? x.key < y.key : (x.q != y.q ? x.q < y.q : x.r < y.r);
    });
    // singleton classes contribute |v_r|^2 u_q, which sums to ||v||^2 u_q together with
    // the diagonal of the coupled classes; only classes with >= 2 pairs are stored
    pairs_ = entries.size();
    for (std::size_t i = 0; i < entries.size();) {
      std::size_t j = i + 1;
      while (j < entries.size() && entries[j].key == entries[i].key) ++j;
      ++classes_;
      max_class_ = std::max(max_class_, j - i);
      if (j - i > 1) {
        start_.push_back(static_cast<std::uint32_t>(q_.size()));
        for (std::size_t p = i; p < j; ++p) {
          q_.push_back(entries[p].q);
          r_.push_back(entries[p].r);
        }
      }
      i = j;
    }
    start_.push_back(static_cast<std::uint32_t>(q_.size()));
  }

  std::size_t pair_count() const { return pairs_; }
  std::size_t coupled_pair_count() const { return q_.size(); }
  std::size_t class_count() const { return classes_; }
  std::size_t max_class_size() const { return max_class_; }

  TorusField mask(int side, TorusField f) const {
    TorusField out(a_[side]);
    for (std::uint32_t i : modes_[side]) out[i] = f[i];
    return out;
  }
  /// Normalized band sum: concentrated at the origin at t = 0. A single plane wave would be a fixed point.
  TorusField warm_start(int side) const {
    TorusField f(a_[side]);
    for (std::uint32_t i : modes_[side]) f[i] = 1.0;
    f *= 1.0 / f.norm();
    return f;
  }
  template <class Rng>
  TorusField random_start(int side, Rng& rng) const {
    std::normal_distribution<double> gauss(0.0, 1.0);
    TorusField f(a_[side]);
    for (std::uint32_t i : modes_[side]) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      f[i] = {re, im};
    }
    f *= 1.0 / f.norm();
    return f;
  }

  auto normal(int side, const TorusField& other) const {
    return [this, side, other](const TorusField& x) {
      const auto& own = side == 0 ? q_ : r_;
      const auto& oth = side == 0 ? r_ : q_;
      const double other2 = other.norm() * other.norm();
      TorusField y = mask(side, x);
      y *= other2;
      for (std::size_t c = 0; c + 1 < start_.size(); ++c) {
        cplx f{};
        for (std::uint32_t p = start_[c]; p < start_[c + 1]; ++p) f += x[own[p]] * other[oth[p]];
        for (std::uint32_t p = start_[c]; p < start_[c + 1]; ++p) {
          const cplx o = other[oth[p]];
          y[own[p]] += std::conj(o) * (f - x[own[p]] * o);
        }
      }
      return y;
    };
  }

 private:
  int a_[2] = {0, 0};
  std::vector<std::uint32_t> modes_[2];
  std::vector<std::uint32_t> q_, r_, start_;
  std::size_t pairs_ = 0, classes_ = 0, max_class_ = 0;
};

enum class ScanGeometry { sphere, torus };

inline const char* to_string(ScanGeometry g) { return g == ScanGeometry::sphere ? "sphere" : "torus"; }

struct StrichartzScanOptions {
  AlternatingOptions alternation{};
  int random_restarts = 0;  // on top of the highest-weight start
  bool warm_start = true;
  unsigned threads = 1;
};

struct StrichartzScanPoint {
  int n = 0;
  int l = 0;
  double quotient = 0.0;
  int rounds = 0;
  double residual = 0.0;
  bool converged = false;
  int restarts_used = 0;
};

struct StrichartzScanResult {
  ScanGeometry geometry = ScanGeometry::sphere;
  std::vector<StrichartzScanPoint> points;
  PowerLawFit fit;  // log quotient against log min(N, L)
};

namespace detail {

template <class Problem>
StrichartzScanPoint maximize_bands(const Problem& pb, int n, int l, const StrichartzScanOptions& opt,
                                   std::uint64_t seed) {
  using Vec = decltype(pb.warm_start(0));
  std::vector<std::pair<Vec, Vec>> starts;
  if (opt.warm_start) starts.emplace_back(pb.warm_start(0), pb.warm_start(1));
  std::mt19937_64 rng(seed);
  for (int r = 0; r < opt.random_restarts; ++r) {
    auto f = pb.random_start(0, rng);
    auto g = pb.random_start(1, rng);
    starts.emplace_back(std::move(f), std::move(g));
  }
  require(!starts.empty(), "scan needs at least one start");
  StrichartzScanPoint best;
  best.n = n;
  best.l = l;
  best.quotient = -1.0;
  for (auto& [f0, g0] : starts) {
    auto res = alternating_maximize(
        std::move(f0), std::move(g0), [&](const Vec& g) { return pb.normal(0, g); },
        [&](const Vec& f) { return pb.normal(1, f); }, opt.alternation);
    ++best.restarts_used;
    if (res.value > best.quotient) {
      best.quotient = res.value;
      best.rounds = res.rounds;
      best.residual = res.residual;
      best.converged = res.converged;
    }
  }
  return best;
}

}  // namespace detail

/// sup over band-limited unit u0, v0 of the Strichartz norm, per band pair (N, L).
inline StrichartzScanPoint strichartz_band_constant(ScanGeometry geometry, int n, int l,
                                                    const StrichartzScanOptions& opt = {}, std::uint64_t seed = 0) {
  if (geometry == ScanGeometry::sphere)
    return detail::maximize_bands(SphereStrichartzProblem(n, l), n, l, opt, seed);
  return detail::maximize_bands(TorusStrichartzProblem(n, l), n, l, opt, seed);
}

inline StrichartzScanResult strichartz_exponent_scan(const std::vector<std::pair<int, int>>& bands,
                                                     ScanGeometry geometry, const StrichartzScanOptions& opt = {},
                                                     std::uint64_t seed = 0) {
  require(bands.size() >= 4, "exponent scan needs at least 4 band pairs");
  StrichartzScanResult out;
  out.geometry = geometry;
  out.points.resize(bands.size());
  StrichartzScanOptions inner = opt;
  inner.threads = 1;
  parallel_for(bands.size(), opt.threads, [&](std::size_t i) {
    out.points[i] = strichartz_band_constant(geometry, bands[i].first, bands[i].second, inner, seed + i);
  });
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : out.points) pts.emplace_back(std::min(p.n, p.l), p.quotient);
  out.fit = fit_growth_exponent(pts);
  return out;
}

}  // namespace bispec
