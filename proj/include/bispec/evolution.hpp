#pragma once

// Linear propagation e^{-it mu_k}, the cubic defocusing NLS
//   i u_t = A u + |u|^2 u      (A = -Delta on the sphere, mu = 2 pi |n|^2 on the torus)
// by Strang splitting, Picard iteration of the Duhamel formula and the flow-map
// stability probe.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "bispec/error.hpp"
#include "bispec/harmonic_basis.hpp"
#include "bispec/spectral_ops.hpp"
#include "bispec/time_series.hpp"

namespace bispec {

// ---------------------------------------------------------------------------
// Discretization spaces: coefficient layout plus a grid exact for the Galerkin
// projection of |u|^2 u.
// ---------------------------------------------------------------------------

class SphereSpace {
 public:
  using Field = HarmonicField;

  /// The grid must resolve 2 k_max, so that P_{<=k_max}(|u|^2 u) is computed exactly.
  SphereSpace(int k_max, SphereGrid grid) : k_max_(k_max) {
    require(k_max >= 0, "k_max must be nonnegative");
    if (!grid.resolves(2 * k_max))
      throw ResolutionError("nonlinear grid must resolve degree " + std::to_string(2 * k_max));
    transform_ = SphereTransform(std::move(grid), k_max);
    weights_ = transform_.grid().weights();
  }
  explicit SphereSpace(int k_max) : SphereSpace(k_max, build_sphere_grid(2 * k_max)) {}

  int range() const { return k_max_; }
  Field zero() const { return Field(k_max_); }
  bool fits(const Field& f) const { return f.k_max() == k_max_; }
  GridValues values(const Field& f) const { return transform_.synthesize(f); }
  Field project(GridValues v) const { return transform_.analyze(std::move(v), 0, k_max_, k_max_); }
  const std::vector<double>& weights() const { return weights_; }
  SpectrumModel exact_spectrum() const { return SpectrumModel::sphere_exact(k_max_); }

 private:
  int k_max_;
  SphereTransform transform_;
  std::vector<double> weights_;
};

class TorusSpace {
 public:
  using Field = TorusField;

  /// Side n >= 4A + 1 keeps the cubic term alias-free on |n_j| <= A.
  TorusSpace(int half_width, TorusGrid grid) : a_(half_width), grid_(grid) {
    require(half_width >= 0, "half-width must be nonnegative");
    if (static_cast<int>(grid.n) < 4 * half_width + 2)
      throw ResolutionError("nonlinear torus grid must have side >= 4A + 2");
    weights_.assign(grid.size(), grid.weight());
  }
  explicit TorusSpace(int half_width) : TorusSpace(half_width, build_torus_product_grid(4 * half_width + 1)) {}

  int range() const { return a_; }
  Field zero() const { return Field(a_); }
  bool fits(const Field& f) const { return f.half_width() == a_; }
  GridValues values(const Field& f) const { return torus_synthesize(f, grid_); }
  Field project(GridValues v) const { return torus_analyze(std::move(v), grid_, a_); }
  const std::vector<double>& weights() const { return weights_; }
  SpectrumModel exact_spectrum() const { return SpectrumModel::torus_exact(a_); }

 private:
  int a_;
  TorusGrid grid_;
  std::vector<double> weights_;
};

// ---------------------------------------------------------------------------
// Linear flow
// ---------------------------------------------------------------------------

template <class Field>
struct EvolutionState {
  Field field;
  double time = 0.0;
  SpectrumModel spec;
};

/// c -> e^{-i t mu} c, coefficientwise.
template <class Field>
Field propagate(Field f, double t, const SpectrumModel& spec) {
  if (spec.size() < f.size()) throw DimensionMismatch("spectrum shorter than field");
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= std::polar(1.0, -t * spec[i]);
  return f;
}

template <class Field>
EvolutionState<Field> linear_propagate(const EvolutionState<Field>& state, double t) {
  return {propagate(state.field, t, state.spec), state.time + t, state.spec};
}

// ---------------------------------------------------------------------------
// Conserved quantities
// ---------------------------------------------------------------------------

template <class Space>
double mass(const Space&, const typename Space::Field& f) {
  const double n = f.norm();
  return n * n;
}

/// sum mu |c|^2 + (1/2) int |u|^4.
template <class Space>
double energy(const Space& space, const typename Space::Field& f, const SpectrumModel& spec) {
  double kinetic = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) kinetic += spec[i] * std::norm(f[i]);
  const auto v = space.values(f);
  const auto& w = space.weights();
  double quartic = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = std::norm(v[i]);
    quartic += w[i] * a * a;
  }
  return kinetic + 0.5 * quartic;
}

struct ConservationReport {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> energy;
  std::vector<double> hs_norm;
  double max_mass_drift = 0.0;    // relative to the initial mass
  double max_energy_drift = 0.0;  // relative to the initial energy
};

// ---------------------------------------------------------------------------
// Cubic NLS
// ---------------------------------------------------------------------------

enum class NonlinearScheme {
  /// Galerkin ODE i c' = P(|u|^2 u) by 3-stage Gauss collocation (conserves mass).
  galerkin_gauss,
  /// u <- P(u e^{-i h |u|^2}) on the grid; the projection leaks mass at O(h^2) per step.
  pointwise_rotation,
};

struct NlsOptions {
  int stride = 1;      // sample every stride steps (the final time is always sampled)
  double s = 1.0;      // exponent of the reported H^s norm
  NonlinearScheme scheme = NonlinearScheme::galerkin_gauss;
  double mass_guard = 1e-6;  // abort when the relative mass drift exceeds this
};

template <class Field>
struct NlsResult {
  TimeSampledField<Field> trajectory;
  ConservationReport report;
};

namespace detail {

template <class Space>
typename Space::Field cubic_term(const Space& space, const typename Space::Field& f) {
  auto v = space.values(f);
  for (auto& x : v) x *= std::norm(x);
  return space.project(std::move(v));
}

/// Flow of i c' = P(|u|^2 u) over time h by the order-6 Gauss method; the stage
/// equations are iterated to roundoff.
template <class Space>
typename Space::Field gauss_nonlinear_step(const Space& space, const typename Space::Field& c, double h) {
  using Field = typename Space::Field;
  static const double r15 = std::sqrt(15.0);
  static const double a[3][3] = {{5.0 / 36, 2.0 / 9 - r15 / 15, 5.0 / 36 - r15 / 30},
                                 {5.0 / 36 + r15 / 24, 2.0 / 9, 5.0 / 36 - r15 / 24},
                                 {5.0 / 36 + r15 / 30, 2.0 / 9 + r15 / 15, 5.0 / 36}};
  static const double b[3] = {5.0 / 18, 4.0 / 9, 5.0 / 18};
  const cplx minus_i(0.0, -1.0);

  auto rhs = [&](const Field& x) {
    Field y = cubic_term(space, x);
    y *= minus_i;
    return y;
  };
  const Field k0 = rhs(c);
  std::array<Field, 3> k{k0, k0, k0};
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    std::array<Field, 3> next;
    for (int i = 0; i < 3; ++i) {
      Field stage = c;
      for (int j = 0; j < 3; ++j) {
        Field kj = k[j];
        kj *= h * a[i][j];
        stage += kj;
      }
      next[i] = rhs(stage);
    }
    double change = 0.0, scale = 0.0;
    for (int i = 0; i < 3; ++i) {
      change = std::max(change, (next[i] - k[i]).norm());
      scale = std::max(scale, next[i].norm());
    }
    k = std::move(next);
    if (!std::isfinite(change)) throw EvolutionError("non-finite stage values");
    if (change <= 1e-15 * scale || change == 0.0) break;
    // roundoff plateau: the iteration no longer contracts
    if (it >= 2 && change >= 0.5 * prev && change <= 1e-12 * scale) break;
    prev = change;
  }
  Field out = c;
  for (int i = 0; i < 3; ++i) {
    Field ki = k[i];
    ki *= h * b[i];
    out += ki;
  }
  return out;
}

template <class Space>
typename Space::Field rotation_nonlinear_step(const Space& space, const typename Space::Field& c, double h) {
  auto v = space.values(c);
  for (auto& x : v) x *= std::polar(1.0, -h * std::norm(x));
  return space.project(std::move(v));
}

}  // namespace detail

/// Strang splitting: half linear step, nonlinear step, half linear step.
template <class Space>
NlsResult<typename Space::Field> nls_evolve(const Space& space, const typename Space::Field& u0, double T, double dt,
                                            const SpectrumModel& spec, const NlsOptions& opt = {}) {
  using Field = typename Space::Field;
  require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  require(T >= 0.0 && std::isfinite(T), "T must be nonnegative");
  require(opt.stride >= 1, "stride must be >= 1");
  if (!space.fits(u0)) throw DimensionMismatch("initial data does not match the space");
  if (spec.size() < u0.size()) throw DimensionMismatch("spectrum shorter than field");

  const auto steps = static_cast<long>(std::max(0.0, std::ceil(T / dt - 1e-9)));
  const double h = steps > 0 ? T / static_cast<double>(steps) : 0.0;

  NlsResult<Field> res;
  res.trajectory.dt = h * opt.stride;
  auto& rep = res.report;
  const double m0 = mass(space, u0);
  const double e0 = energy(space, u0, spec);
  auto record = [&](const Field& f, double t) {
    const double m = mass(space, f);
    const double e = energy(space, f, spec);
    rep.times.push_back(t);
    rep.mass.push_back(m);
    rep.energy.push_back(e);
    rep.hs_norm.push_back(sobolev_norm(f, opt.s, spec));
    if (m0 > 0.0) rep.max_mass_drift = std::max(rep.max_mass_drift, std::abs(m - m0) / m0);
    if (e0 != 0.0) rep.max_energy_drift = std::max(rep.max_energy_drift, std::abs(e - e0) / std::abs(e0));
    res.trajectory.fields.push_back(f);
  };

  Field u = u0;
  record(u, 0.0);
  for (long n = 1; n <= steps; ++n) {
    u = propagate(std::move(u), 0.5 * h, spec);
    u = opt.scheme == NonlinearScheme::galerkin_gauss ? detail::gauss_nonlinear_step(space, u, h)
                                                      : detail::rotation_nonlinear_step(space, u, h);
    u = propagate(std::move(u), 0.5 * h, spec);

    const double m = mass(space, u);
    if (!std::isfinite(m)) throw EvolutionError("non-finite field at step " + std::to_string(n));
    if (m0 > 0.0 && std::abs(m - m0) / m0 > opt.mass_guard)
      throw EvolutionError("mass drift " + std::to_string(std::abs(m - m0) / m0) + " at step " + std::to_string(n));
    if (n % opt.stride == 0 || n == steps) record(u, static_cast<double>(n) * h);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Duhamel / Picard
// ---------------------------------------------------------------------------

struct PicardOptions {
  double s = 1.0;             // residuals measured in H^s
  double floor = 1e-14;       // stop once residual <= floor * sup_t ||u||_{H^s}
};

template <class Field>
struct PicardResult {
  Field final_field;
  std::vector<double> residuals;  // residual_j = sup_t ||u^{(j+1)} - u^{(j)}||_{H^s}
  std::vector<double> times;
  bool diverged = false;          // residuals rose three times in a row
  bool reached_floor = false;
};

/// Default node count: 8 (max phase frequency) T / (2 pi), at least 64.
inline int default_time_nodes(double max_frequency, double T) {
  const double n = 8.0 * max_frequency * T / (2.0 * kPi);
  return static_cast<int>(std::clamp(std::ceil(n), 64.0, 1e7));
}

/// u^{(0)}(t) = S(t) u0, u^{(j+1)}(t) = S(t)[u0 - i int_0^t S(-t') |u^{(j)}|^2 u^{(j)}(t') dt'],
/// with the time integral by the composite trapezoid rule on nt uniform nodes.
template <class Space>
PicardResult<typename Space::Field> picard_solve(const Space& space, const typename Space::Field& u0, double T,
                                                 const SpectrumModel& spec, int n_iters, int nt,
                                                 const PicardOptions& opt = {}) {
  using Field = typename Space::Field;
  require(T >= 0.0, "T must be nonnegative");
  require(n_iters >= 0, "iteration count must be nonnegative");
  if (!space.fits(u0)) throw DimensionMismatch("initial data does not match the space");
  if (spec.size() < u0.size()) throw DimensionMismatch("spectrum shorter than field");
  if (nt <= 0) {
    double top = 0.0;
    for (std::size_t i = 0; i < u0.size(); ++i) top = std::max(top, std::abs(spec[i]));
    nt = default_time_nodes(top, T);
  }
  require(nt >= 2, "need at least 2 time nodes");

  PicardResult<Field> res;
  const double h = T / static_cast<double>(nt - 1);
  for (int j = 0; j < nt; ++j) res.times.push_back(h * j);

  std::vector<Field> iterate(static_cast<std::size_t>(nt));
  for (int j = 0; j < nt; ++j) iterate[j] = propagate(u0, res.times[j], spec);
  double scale = 0.0;
  for (const auto& f : iterate) scale = std::max(scale, sobolev_norm(f, opt.s, spec));

  const cplx minus_i(0.0, -1.0);
  int rises = 0;
  for (int it = 0; it < n_iters; ++it) {
    // integrand in the interaction picture: S(-t) N(u(t))
    std::vector<Field> g(static_cast<std::size_t>(nt));
    for (int j = 0; j < nt; ++j) g[j] = propagate(detail::cubic_term(space, iterate[j]), -res.times[j], spec);
    std::vector<Field> next(static_cast<std::size_t>(nt));
    Field acc = space.zero();
    double resid = 0.0;
    for (int j = 0; j < nt; ++j) {
      if (j > 0) {
        Field step = g[j - 1] + g[j];
        step *= 0.5 * h;
        acc += step;
      }
      Field v = acc;
      v *= minus_i;
      v += u0;
      next[j] = propagate(std::move(v), res.times[j], spec);
      resid = std::max(resid, sobolev_norm(next[j] - iterate[j], opt.s, spec));
    }
    iterate = std::move(next);
    if (!res.residuals.empty() && resid > res.residuals.back()) {
      if (++rises >= 3) res.diverged = true;
    } else {
      rises = 0;
    }
    res.residuals.push_back(resid);
    if (!std::isfinite(resid)) {
      res.diverged = true;
      break;
    }
    if (resid <= opt.floor * std::max(scale, std::numeric_limits<double>::min())) {
      res.reached_floor = true;
      break;
    }
  }
  res.final_field = iterate.back();
  return res;
}

/// Sphere entry point with the exact spectrum, data truncated to degree k_max.
inline PicardResult<HarmonicField> picard_solve(const HarmonicField& u0, double T, int k_max, int n_iters, int nt,
                                                const PicardOptions& opt = {}) {
  const SphereSpace space(k_max);
  return picard_solve(space, u0.resized(k_max), T, space.exact_spectrum(), n_iters, nt, opt);
}

// ---------------------------------------------------------------------------
// Stability probe
// ---------------------------------------------------------------------------

struct StabilityProbeOptions {
  int k_max = -1;  // truncation degree, default 2n
  int stride = 1;
};

/// sup_{t<=T} ||u(t) - v(t)||_{H^s} / ||u0 - v0||_{H^s} for u0 = a phi_n / ||phi_n||_{H^s}
/// and v0 = (a + delta) phi_n / ||phi_n||_{H^s}, on the exact sphere.
inline double flow_stability_probe(int n, double s, double a, double delta, double T, double dt,
                                   const StabilityProbeOptions& opt = {}) {
  require(n >= 1, "probe degree must be >= 1");
  require(a >= 0.0 && delta >= 0.0, "amplitudes must be nonnegative");
  require(a == 0.0 ? true : delta < a, "probe needs delta < a");
  if (delta == 0.0) return 1.0;
  const int k_max = opt.k_max < 0 ? 2 * n : opt.k_max;
  require(k_max >= n, "truncation below the probe degree");
  const SphereSpace space(k_max);
  const auto spec = space.exact_spectrum();
  HarmonicField phi = make_highest_weight(n, k_max);
  phi *= 1.0 / sobolev_norm(phi, s, spec);
  HarmonicField u0 = phi, v0 = phi;
  u0 *= a;
  v0 *= a + delta;
  NlsOptions nopt;
  nopt.stride = opt.stride;
  nopt.s = s;
  const auto ru = nls_evolve(space, u0, T, dt, spec, nopt);
  const auto rv = nls_evolve(space, v0, T, dt, spec, nopt);
  const double d0 = sobolev_norm(v0 - u0, s, spec);
  double worst = 0.0;
  for (std::size_t j = 0; j < ru.trajectory.size(); ++j)
    worst = std::max(worst, sobolev_norm(rv.trajectory.fields[j] - ru.trajectory.fields[j], s, spec));
  return worst / d0;
}

}  // namespace bispec
