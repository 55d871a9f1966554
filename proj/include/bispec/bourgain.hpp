#pragma once

// Discrete X^{s,b} norms of windowed time-sampled trajectories,
//   ||u||^2_{X^{s,b}} = sum_k int <sigma>^{2b} <mu_k>^s |F_t[e^{it mu_k} P_k u](sigma)|^2 dsigma / 2 pi,
// the L^4_t L^2_x and L^inf_t L^2_x norms they control, and the comparison of
// X^{s,b} under two spectra.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "bispec/error.hpp"
#include "bispec/fft.hpp"
#include "bispec/harmonic_basis.hpp"
#include "bispec/spectral_ops.hpp"
#include "bispec/time_series.hpp"

namespace bispec {

/// C^infinity cutoff on [0, t_win]: 0 at the ends, 1 on [t_win/4, 3 t_win/4].
inline double time_window(double t, double t_win) {
  const double x = 4.0 * t / t_win;
  auto step = [](double y) {  // smooth 0 -> 1 on [0, 1]
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / y), b = std::exp(-1.0 / (1.0 - y));
    return a / (a + b);
  };
  if (x <= 0.0 || x >= 4.0) return 0.0;
  return x < 2.0 ? step(x) : step(4.0 - x);
}

/// Samples t_j = j t_win / n_t, j < n_t.
template <class Field>
TimeSampledField<Field> sample_uniform(std::vector<Field> fields, double t_win) {
  TimeSampledField<Field> traj;
  require(fields.size() >= 2, "need at least two samples");
  traj.dt = t_win / static_cast<double>(fields.size());
  traj.fields = std::move(fields);
  return traj;
}

/// Multiplies sample j by psi(t_j) on [t0, t0 + n_t dt).
template <class Field>
TimeSampledField<Field> apply_time_window(TimeSampledField<Field> traj) {
  traj.validate();
  const double span = traj.span();
  for (std::size_t j = 0; j < traj.size(); ++j) traj.fields[j] *= time_window(traj.dt * j, span);
  traj.windowed = true;
  return traj;
}

struct XsbNorm {
  double s = 0.0;
  double b = 0.0;
  double value = 0.0;
  double half_rate_change = 0.0;  // relative change when every other sample is dropped
  bool nyquist_ok = true;         // half_rate_change <= kXsbNyquistTol
};

inline constexpr double kXsbNyquistTol = 1e-4;

namespace detail {

template <class Field>
double xsb_value(const TimeSampledField<Field>& traj, double s, double b, const SpectrumModel& spec,
                 std::size_t stride) {
  const std::size_t nt = traj.size() / stride;
  const std::size_t nc = traj.fields.front().size();
  const double dt = traj.dt * static_cast<double>(stride);
  if (spec.size() < nc) throw DimensionMismatch("spectrum shorter than trajectory fields");
  std::vector<cplx> rows(nc * nt);
  for (std::size_t j = 0; j < nt; ++j) {
    const auto& f = traj.fields[j * stride];
    const double t = traj.t0 + dt * static_cast<double>(j);
    for (std::size_t i = 0; i < nc; ++i) rows[i * nt + j] = f[i] * std::polar(1.0, t * spec[i]);
  }
  BatchedFft(nt, nc).forward(rows);
  std::vector<double> wt(nt);
  const double dsig = 2.0 * kPi / (static_cast<double>(nt) * dt);
  for (std::size_t q = 0; q < nt; ++q) {
    const double qq = q < (nt + 1) / 2 ? double(q) : double(q) - double(nt);
    wt[q] = std::pow(japanese(qq * dsig), 2.0 * b);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < nc; ++i) {
    double row = 0.0;
    for (std::size_t q = 0; q < nt; ++q) row += wt[q] * std::norm(rows[i * nt + q]);
    acc += std::pow(japanese(spec[i]), s) * row;
  }
  // Parseval: dt^2 |DFT|^2 summed with spacing dsig / 2 pi
  return std::sqrt(acc * dt * dt / (static_cast<double>(nt) * dt));
}

}  // namespace detail

/// Discrete X^{s,b} norm on the periodic window [t0, t0 + n_t dt). The trajectory must
/// carry a time cutoff. The resolution check compares with the half-rate subsample.
template <class Field>
XsbNorm xsb_norm(const TimeSampledField<Field>& traj, double s, double b, const SpectrumModel& spec) {
  traj.validate();
  if (!traj.windowed) throw InvalidParams("xsb_norm needs a windowed trajectory");
  XsbNorm out;
  out.s = s;
  out.b = b;
  out.value = detail::xsb_value(traj, s, b, spec, 1);
  if (traj.size() >= 4) {
    const double half = detail::xsb_value(traj, s, b, spec, 2);
    out.half_rate_change = out.value > 0.0 ? std::abs(half - out.value) / out.value : std::abs(half);
    out.nyquist_ok = out.half_rate_change <= kXsbNyquistTol;
  }
  return out;
}

/// (sum_j dt ||u(t_j)||^4)^{1/4}.
template <class Field>
double l4t_l2x_norm(const TimeSampledField<Field>& traj) {
  traj.validate();
  double acc = 0.0;
  for (const auto& f : traj.fields) {
    const double n2 = f.norm() * f.norm();
    acc += traj.dt * n2 * n2;
  }
  return std::pow(acc, 0.25);
}

/// (sum_j dt ||u(t_j)||^2)^{1/2}.
template <class Field>
double l2t_l2x_norm(const TimeSampledField<Field>& traj) {
  traj.validate();
  double acc = 0.0;
  for (const auto& f : traj.fields) acc += traj.dt * f.norm() * f.norm();
  return std::sqrt(acc);
}

template <class Field>
double linf_t_l2x_norm(const TimeSampledField<Field>& traj) {
  traj.validate();
  double m = 0.0;
  for (const auto& f : traj.fields) m = std::max(m, f.norm());
  return m;
}

/// ||traj||_{X^{s,b}_A} / ||traj||_{X^{s,b}_B}; a zero trajectory gives 1.
template <class Field>
double norm_equivalence_ratio(const TimeSampledField<Field>& traj, const SpectrumModel& spec_a,
                              const SpectrumModel& spec_b, double s, double b) {
  const double na = xsb_norm(traj, s, b, spec_a).value;
  const double nb = xsb_norm(traj, s, b, spec_b).value;
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (nb == 0.0) throw InvalidParams("reference norm vanishes on a nonzero trajectory");
  return na / nb;
}

/// sup_x (<x + d> / <x>) = sqrt(((2 + d^2) + sqrt(d^4 + 4 d^2)) / 2).
inline double japanese_shift_bound(double d) {
  d = std::abs(d);
  return std::sqrt(0.5 * ((2.0 + d * d) + std::sqrt(d * d * d * d + 4.0 * d * d)));
}

/// R with 1/R <= ratio <= R: the time weights shift by at most max |mu_A - mu_B|, the
/// spatial weights <mu>^{s/2} differ by at most their extreme ratio.
inline double equivalence_bound(const SpectrumModel& spec_a, const SpectrumModel& spec_b, std::size_t count,
                                double s, double b) {
  if (spec_a.size() < count || spec_b.size() < count) throw DimensionMismatch("spectra shorter than field");
  double d = 0.0, rs = 1.0;
  for (std::size_t i = 0; i < count; ++i) {
    d = std::max(d, std::abs(spec_a[i] - spec_b[i]));
    const double r = std::pow(japanese(spec_a[i]) / japanese(spec_b[i]), 0.5 * s);
    rs = std::max({rs, r, 1.0 / r});
  }
  return std::pow(japanese_shift_bound(d), std::abs(b)) * rs;
}

// ---------------------------------------------------------------------------
// Random windowed trajectories
// ---------------------------------------------------------------------------

struct TrajectorySuiteOptions {
  int k_max = 8;
  std::size_t n_t = 256;
  double t_win = 2.0;
  double max_detune = 0.0;  // |nu| bound; 0 selects a quarter of the Nyquist frequency
};

/// psi(t) e^{-it mu} (alpha + beta e^{i nu t}) with seeded random alpha, beta, nu.
template <class Rng>
TimeSampledField<HarmonicField> random_trajectory(const SpectrumModel& spec, const TrajectorySuiteOptions& opt,
                                                  Rng& rng) {
  require(opt.n_t >= 4 && opt.t_win > 0.0, "trajectory needs n_t >= 4 and t_win > 0");
  spec.check_covers(opt.k_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  HarmonicField alpha = random_field(0, opt.k_max, rng, opt.k_max);
  HarmonicField beta = random_field(0, opt.k_max, rng, opt.k_max);
  alpha *= 0.25 + unit(rng);
  beta *= unit(rng);
  const double nyquist = kPi * static_cast<double>(opt.n_t) / opt.t_win;
  const double nu_max = opt.max_detune > 0.0 ? opt.max_detune : 0.25 * nyquist;
  const double nu = nu_max * (2.0 * unit(rng) - 1.0);
  std::vector<HarmonicField> fields;
  fields.reserve(opt.n_t);
  const double dt = opt.t_win / static_cast<double>(opt.n_t);
  for (std::size_t j = 0; j < opt.n_t; ++j) {
    const double t = dt * static_cast<double>(j);
    HarmonicField f(opt.k_max);
    const cplx det = std::polar(1.0, nu * t);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::polar(1.0, -t * spec[i]) * (alpha[i] + beta[i] * det);
    fields.push_back(std::move(f));
  }
  return apply_time_window(sample_uniform(std::move(fields), opt.t_win));
}

enum class EmbeddingKind { l4t_l2x, linf_t_l2x };

struct EmbeddingCheck {
  double constant = 0.0;       // max ratio over the suite at n_t
  double refined_worst = 0.0;  // max ratio over the same suite at 2 n_t
  bool holds = false;          // refined_worst <= (1 + slack) constant
  std::vector<double> ratios;
};

/// Fits ||u||_Y <= C ||u||_{X^{0,b}} on `trials` seeded trajectories and re-checks the
/// envelope on the same trajectories sampled twice as finely.
inline EmbeddingCheck check_embedding(EmbeddingKind kind, double b, int trials, const SpectrumModel& spec,
                                      const TrajectorySuiteOptions& opt, std::uint64_t seed, double slack = 0.01) {
  require(trials >= 1, "need at least one trajectory");
  auto ratio = [&](const TimeSampledField<HarmonicField>& tr) {
    const double lhs = kind == EmbeddingKind::l4t_l2x ? l4t_l2x_norm(tr) : linf_t_l2x_norm(tr);
    return lhs / xsb_norm(tr, 0.0, b, spec).value;
  };
  EmbeddingCheck out;
  TrajectorySuiteOptions fine = opt;
  fine.n_t = 2 * opt.n_t;
  if (fine.max_detune == 0.0) fine.max_detune = 0.25 * kPi * static_cast<double>(opt.n_t) / opt.t_win;
  TrajectorySuiteOptions coarse = opt;
  coarse.max_detune = fine.max_detune;
  for (int i = 0; i < trials; ++i) {
    std::mt19937_64 r1(seed + static_cast<std::uint64_t>(i)), r2(seed + static_cast<std::uint64_t>(i));
    out.ratios.push_back(ratio(random_trajectory(spec, coarse, r1)));
    out.constant = std::max(out.constant, out.ratios.back());
    out.refined_worst = std::max(out.refined_worst, ratio(random_trajectory(spec, fine, r2)));
  }
  out.holds = out.refined_worst <= (1.0 + slack) * out.constant;
  return out;
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

struct XsbSuiteOptions {
  TrajectorySuiteOptions trajectory{};
  int trials = 50;
  double b_l4 = 0.4;
  double b_linf = 0.6;
  double b_equiv = 0.6;
  int alpha = 2;            // Zoll Maslov-type index
  double half_width = 1.0;  // Zoll cluster half-width E
};

struct XsbSuiteRow {
  int trial = 0;
  double l2_space_time = 0.0;
  double xsb_00 = 0.0;
  double l4t_l2x = 0.0;
  double xsb_l4 = 0.0;    // X^{0, b_l4}
  double linf_t_l2x = 0.0;
  double xsb_linf = 0.0;  // X^{0, b_linf}
  double equiv_ratio = 0.0;  // Zoll over rounded, (s, b) = (0, b_equiv)
  double equiv_bound = 0.0;
  double equiv_ratio_00 = 0.0;
};

struct XsbSuiteReport {
  std::vector<XsbSuiteRow> rows;
  double max_l2_rel_diff = 0.0;      // |X^{0,0} - L^2_{t,x}| / L^2_{t,x}
  std::vector<double> free_mode_norms;  // X^{0, b_linf} of psi e^{-it mu_k} Y_k^0, k = 0..k_max
  double free_mode_spread = 0.0;        // (max - min) / max of the above
  EmbeddingCheck l4;
  EmbeddingCheck linf;
  double max_equiv_excess = 0.0;  // max over trials of max(r, 1/r) / R; <= 1 required
  double max_equiv_00_dev = 0.0;  // max |ratio - 1| at (s, b) = (0, 0)
  bool nyquist_ok = true;
};

inline XsbSuiteReport run_xsb_suite(const XsbSuiteOptions& opt, std::uint64_t seed) {
  require(opt.trials >= 1, "suite needs at least one trial");
  const auto& to = opt.trajectory;
  const auto sphere = SpectrumModel::sphere_exact(to.k_max);
  const auto zoll = make_zoll_spectrum(opt.alpha, opt.half_width, to.k_max, seed);
  const auto rounded = round_spectrum(zoll);
  XsbSuiteReport rep;

  for (int k = 0; k <= to.k_max; ++k) {
    std::vector<HarmonicField> fs;
    const double dt = to.t_win / static_cast<double>(to.n_t);
    for (std::size_t j = 0; j < to.n_t; ++j) {
      HarmonicField f(to.k_max);
      f(k, 0) = std::polar(1.0, -dt * static_cast<double>(j) * sphere.eigenvalue(k, 0));
      fs.push_back(std::move(f));
    }
    const auto x = xsb_norm(apply_time_window(sample_uniform(std::move(fs), to.t_win)), 0.0, opt.b_linf, sphere);
    rep.nyquist_ok = rep.nyquist_ok && x.nyquist_ok;
    rep.free_mode_norms.push_back(x.value);
  }
  const auto [lo, hi] = std::minmax_element(rep.free_mode_norms.begin(), rep.free_mode_norms.end());
  rep.free_mode_spread = (*hi - *lo) / *hi;

  for (int i = 0; i < opt.trials; ++i) {
    std::mt19937_64 rs(seed + static_cast<std::uint64_t>(i));
    std::mt19937_64 rz(seed + 1000003ULL + static_cast<std::uint64_t>(i));
    const auto tr = random_trajectory(sphere, to, rs);
    const auto tz = random_trajectory(zoll, to, rz);
    XsbSuiteRow row;
    row.trial = i;
    row.l2_space_time = l2t_l2x_norm(tr);
    const auto x00 = xsb_norm(tr, 0.0, 0.0, sphere);
    const auto xl4 = xsb_norm(tr, 0.0, opt.b_l4, sphere);
    const auto xli = xsb_norm(tr, 0.0, opt.b_linf, sphere);
    rep.nyquist_ok = rep.nyquist_ok && x00.nyquist_ok && xl4.nyquist_ok && xli.nyquist_ok;
    row.xsb_00 = x00.value;
    row.l4t_l2x = l4t_l2x_norm(tr);
    row.xsb_l4 = xl4.value;
    row.linf_t_l2x = linf_t_l2x_norm(tr);
    row.xsb_linf = xli.value;
    row.equiv_ratio = norm_equivalence_ratio(tz, zoll, rounded, 0.0, opt.b_equiv);
    row.equiv_bound = equivalence_bound(zoll, rounded, tz.fields.front().size(), 0.0, opt.b_equiv);
    row.equiv_ratio_00 = norm_equivalence_ratio(tz, zoll, rounded, 0.0, 0.0);
    rep.max_l2_rel_diff = std::max(rep.max_l2_rel_diff, std::abs(row.xsb_00 - row.l2_space_time) / row.l2_space_time);
    rep.max_equiv_excess =
        std::max(rep.max_equiv_excess, std::max(row.equiv_ratio, 1.0 / row.equiv_ratio) / row.equiv_bound);
    rep.max_equiv_00_dev = std::max(rep.max_equiv_00_dev, std::abs(row.equiv_ratio_00 - 1.0));
    rep.rows.push_back(row);
  }
  rep.l4 = check_embedding(EmbeddingKind::l4t_l2x, opt.b_l4, opt.trials, sphere, to, seed);
  rep.linf = check_embedding(EmbeddingKind::linf_t_l2x, opt.b_linf, opt.trials, sphere, to, seed);
  return rep;
}

}  // namespace bispec
