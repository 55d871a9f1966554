#pragma once

// Spectral projectors, band windows, Sobolev norms and spectrum models.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bispec/error.hpp"
#include "bispec/harmonic_basis.hpp"

namespace bispec {

/// Japanese bracket <x> = (1 + x^2)^{1/2}.
inline double japanese(double x) { return std::sqrt(1.0 + x * x); }

// ---------------------------------------------------------------------------
// SpectrumModel
// ---------------------------------------------------------------------------

enum class SpectrumKind { sphere_exact, torus_exact, synthetic_zoll, rounded };

inline const char* to_string(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::sphere_exact: return "sphere";
    case SpectrumKind::torus_exact: return "torus";
    case SpectrumKind::synthetic_zoll: return "zoll";
    case SpectrumKind::rounded: return "rounded";
  }
  return "?";
}

/// Eigenvalue map over the flat coefficient index of HarmonicField (sphere-like
/// kinds) or TorusField (torus_exact). The eigenfunctions are always the basis
/// functions; only the eigenvalues differ between kinds.
class SpectrumModel {
 public:
  SpectrumModel() = default;

  static SpectrumModel sphere_exact(int k_max) {
    require(k_max >= 0, "k_max must be nonnegative");
    SpectrumModel s;
    s.kind_ = SpectrumKind::sphere_exact;
    s.range_ = k_max;
    s.mu_.resize(HarmonicField::count(k_max));
    for (int k = 0; k <= k_max; ++k)
      for (int m = -k; m <= k; ++m) s.mu_[HarmonicField::index(k, m)] = double(k) * (k + 1);
    return s;
  }

  /// Torus in the lattice time convention: mu_n = 2 pi |n|^2, so e^{-i t mu} is 1-periodic.
  static SpectrumModel torus_exact(int half_width) {
    require(half_width >= 0, "half-width must be nonnegative");
    SpectrumModel s;
    s.kind_ = SpectrumKind::torus_exact;
    s.range_ = half_width;
    TorusField layout(half_width);
    s.mu_.resize(layout.size());
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const auto [n1, n2] = layout.mode(i);
      s.mu_[i] = 2.0 * kPi * double(n1 * n1 + n2 * n2);
    }
    return s;
  }

  /// Build from an explicit eigenvalue list over the sphere layout (used by the
  /// text reader and by the Zoll generator).
  static SpectrumModel from_values(SpectrumKind kind, int k_max, std::vector<double> mu, int alpha = 0,
                                   double half_width = 0.0, std::uint64_t seed = 0) {
    require(mu.size() == HarmonicField::count(k_max), "eigenvalue count does not match k_max");
    SpectrumModel s;
    s.kind_ = kind;
    s.range_ = k_max;
    s.mu_ = std::move(mu);
    s.alpha_ = alpha;
    s.cluster_half_width_ = half_width;
    s.seed_ = seed;
    return s;
  }

  SpectrumKind kind() const { return kind_; }
  bool is_torus() const { return kind_ == SpectrumKind::torus_exact; }
  /// k_max for sphere-like kinds, half-width A for the torus.
  int range() const { return range_; }
  int k_max() const { return range_; }
  std::size_t size() const { return mu_.size(); }

  double operator[](std::size_t idx) const { return mu_.at(idx); }
  double eigenvalue(int k, int m) const { return mu_.at(HarmonicField::index(k, m)); }
  const std::vector<double>& values() const { return mu_; }

  int alpha() const { return alpha_; }
  double cluster_half_width() const { return cluster_half_width_; }
  std::uint64_t seed() const { return seed_; }
  double cluster_center(int k) const {
    const double c = k + alpha_ / 4.0;
    return c * c;
  }

  /// Same model restricted or checked against a field range.
  void check_covers(int k_max) const {
    if (is_torus() || k_max > range_)
      throw DimensionMismatch("spectrum covers degrees <= " + std::to_string(range_) + ", field needs " +
                              std::to_string(k_max));
  }

 private:
  SpectrumKind kind_ = SpectrumKind::sphere_exact;
  int range_ = -1;
  std::vector<double> mu_;
  int alpha_ = 0;
  double cluster_half_width_ = 0.0;
  std::uint64_t seed_ = 0;
};

/// First cluster index from which I_k and I_{k+1} are disjoint for all larger k.
/// Gap between consecutive centers is 2k + 1 + alpha/2.
inline int zoll_separation_index(int alpha, double half_width) {
  const double k = (2.0 * half_width - 1.0 - alpha / 2.0) / 2.0;
  return std::max(0, static_cast<int>(std::floor(k)) + 1);
}

/// Synthetic Zoll-type spectrum: cluster k carries 2k+1 eigenvalues drawn uniformly
/// from I_k = [(k + alpha/4)^2 - E, (k + alpha/4)^2 + E] (clipped at 0).
/// Clusters must be pairwise disjoint from cluster index `first_cluster` on.
inline SpectrumModel make_zoll_spectrum(int alpha, double half_width, int k_max, std::uint64_t seed,
                                        int first_cluster = 1) {
  require(alpha >= 0, "alpha must be a nonnegative integer");
  require(half_width >= 0.0 && std::isfinite(half_width), "cluster half-width E must be >= 0");
  require(k_max >= 0, "k_max must be nonnegative");
  const int k0 = zoll_separation_index(alpha, half_width);
  if (k0 > first_cluster)
    throw InvalidParams("clusters I_k overlap up to k=" + std::to_string(k0 - 1) + " for alpha=" +
                        std::to_string(alpha) + ", E=" + std::to_string(half_width));
  std::mt19937_64 rng(seed);
  std::vector<double> mu(HarmonicField::count(k_max));
  for (int k = 0; k <= k_max; ++k) {
    const double c = (k + alpha / 4.0) * (k + alpha / 4.0);
    const double lo = std::max(0.0, c - half_width);
    const double hi = c + half_width;
    for (int m = -k; m <= k; ++m) {
      // 53 random mantissa bits; independent of the standard library's distributions
      const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
      mu[HarmonicField::index(k, m)] = half_width == 0.0 ? c : lo + (hi - lo) * u;
    }
  }
  return SpectrumModel::from_values(SpectrumKind::synthetic_zoll, k_max, std::move(mu), alpha,
                                    half_width, seed);
}

/// Replace every eigenvalue by its cluster center (k + alpha/4)^2.
inline SpectrumModel round_spectrum(const SpectrumModel& spec) {
  if (spec.kind() != SpectrumKind::synthetic_zoll && spec.kind() != SpectrumKind::rounded)
    throw InvalidParams("round_spectrum needs a synthetic-zoll spectrum");
  std::vector<double> mu(spec.size());
  for (int k = 0; k <= spec.k_max(); ++k)
    for (int m = -k; m <= k; ++m) mu[HarmonicField::index(k, m)] = spec.cluster_center(k);
  return SpectrumModel::from_values(SpectrumKind::rounded, spec.k_max(), std::move(mu), spec.alpha(),
                                    spec.cluster_half_width(), spec.seed());
}

// Text format: header line, then one "k m mu" line per eigenvalue.
//   #zoll alpha=A E=B seed=S k_max=K
//   #rounded alpha=A E=B seed=S k_max=K
//   #sphere k_max=K
inline void write_spectrum(std::ostream& os, const SpectrumModel& spec) {
  if (spec.is_torus()) throw InvalidParams("text format covers sphere-indexed spectra only");
  std::ostringstream head;
  head.precision(17);
  head << '#' << to_string(spec.kind());
  if (spec.kind() != SpectrumKind::sphere_exact)
    head << " alpha=" << spec.alpha() << " E=" << spec.cluster_half_width() << " seed=" << spec.seed();
  head << " k_max=" << spec.k_max();
  os << head.str() << '\n';
  char line[96];
  for (int k = 0; k <= spec.k_max(); ++k)
    for (int m = -k; m <= k; ++m) {
      std::snprintf(line, sizeof line, "%d %d %.17g\n", k, m, spec.eigenvalue(k, m));
      os << line;
    }
}

inline SpectrumModel read_spectrum(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.empty() || header[0] != '#')
    throw InvalidParams("spectrum file must start with a '#' header");
  std::istringstream hs(header.substr(1));
  std::string kind_word;
  hs >> kind_word;
  SpectrumKind kind;
  if (kind_word == "zoll") kind = SpectrumKind::synthetic_zoll;
  else if (kind_word == "rounded") kind = SpectrumKind::rounded;
  else if (kind_word == "sphere") kind = SpectrumKind::sphere_exact;
  else throw InvalidParams("unknown spectrum kind '" + kind_word + "'");
  int alpha = 0, k_max = -1;
  double e = 0.0;
  std::uint64_t seed = 0;
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw InvalidParams("malformed header token '" + tok + "'");
    const auto key = tok.substr(0, eq);
    const auto val = tok.substr(eq + 1);
    if (key == "alpha") alpha = std::stoi(val);
    else if (key == "E") e = std::stod(val);
    else if (key == "seed") seed = std::stoull(val);
    else if (key == "k_max") k_max = std::stoi(val);
    else throw InvalidParams("unknown header key '" + key + "'");
  }
  std::vector<std::tuple<int, int, double>> rows;
  int k, m;
  double mu;
  int max_k = -1;
  while (is >> k >> m >> mu) {
    if (k < 0 || std::abs(m) > k) throw InvalidParams("invalid (k, m) in spectrum file");
    rows.emplace_back(k, m, mu);
    max_k = std::max(max_k, k);
  }
  if (k_max < 0) k_max = max_k;
  if (rows.size() != HarmonicField::count(k_max))
    throw InvalidParams("spectrum file has " + std::to_string(rows.size()) + " rows, expected " +
                        std::to_string(HarmonicField::count(k_max)));
  std::vector<double> values(rows.size());
  for (const auto& [kk, mm, v] : rows) values[HarmonicField::index(kk, mm)] = v;
  return SpectrumModel::from_values(kind, k_max, std::move(values), alpha, e, seed);
}

// ---------------------------------------------------------------------------
// SpectralWindow
// ---------------------------------------------------------------------------

/// Multiplier evaluated at sqrt(mu).
///   sharp_band:  indicator of [N, 2N]
///   interval:    indicator of [lo, hi]
///   smooth_bump: chi(sqrt(mu) - lambda) with chi(x) = exp(1 - 1/(1 - (x/h)^2)) on |x| < h
class SpectralWindow {
 public:
  enum class Shape { sharp_band, interval, smooth_bump };

  static SpectralWindow dyadic(double n) {
    require(n > 0.0, "dyadic band parameter must be positive");
    return {Shape::sharp_band, n, 2.0 * n, n};
  }
  static SpectralWindow interval(double lo, double hi) {
    require(lo <= hi, "interval window needs lo <= hi");
    return {Shape::interval, lo, hi, 0.5 * (lo + hi)};
  }
  /// Support width 2 * half_width around `center`.
  static SpectralWindow bump(double center, double half_width = 1.0) {
    require(half_width > 0.0, "bump half-width must be positive");
    return {Shape::smooth_bump, center - half_width, center + half_width, center};
  }
  /// Sharp window passing exactly the sphere degree n (consecutive sqrt(k(k+1)) differ by > 1/2).
  static SpectralWindow sphere_degree(int n) {
    require(n >= 0, "degree must be nonnegative");
    const double c = std::sqrt(double(n) * (n + 1));
    return interval(c - 0.25, c + 0.25);
  }

  Shape shape() const { return shape_; }
  double center() const { return center_; }
  double lower() const { return lo_; }
  double upper() const { return hi_; }

  double operator()(double sqrt_mu) const {
    switch (shape_) {
      case Shape::sharp_band:
      case Shape::interval:
        return (sqrt_mu >= lo_ && sqrt_mu <= hi_) ? 1.0 : 0.0;
      case Shape::smooth_bump: {
        const double h = 0.5 * (hi_ - lo_);
        const double x = (sqrt_mu - center_) / h;
        if (std::abs(x) >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - x * x));
      }
    }
    return 0.0;
  }
  double at_eigenvalue(double mu) const { return (*this)(std::sqrt(std::max(0.0, mu))); }

 private:
  SpectralWindow(Shape s, double lo, double hi, double c) : shape_(s), lo_(lo), hi_(hi), center_(c) {}
  Shape shape_;
  double lo_, hi_, center_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Orthogonal projector P_k onto degree k.
inline HarmonicField project_degree(const HarmonicField& f, int k) {
  require(k >= 0 && k <= f.k_max(), "project_degree: degree out of range");
  HarmonicField out(f.k_max());
  for (int m = -k; m <= k; ++m) out(k, m) = f(k, m);
  return out;
}

/// c_{k,m} -> w(sqrt(mu_{k,m})) c_{k,m}.
inline HarmonicField apply_window(const HarmonicField& f, const SpectralWindow& w, const SpectrumModel& spec) {
  spec.check_covers(f.k_max());
  HarmonicField out(f.k_max());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = w.at_eigenvalue(spec[i]) * f[i];
  return out;
}

inline TorusField apply_window(const TorusField& f, const SpectralWindow& w, const SpectrumModel& spec) {
  if (!spec.is_torus() || spec.range() != f.half_width())
    throw DimensionMismatch("torus field needs the matching torus spectrum");
  TorusField out(f.half_width());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = w.at_eigenvalue(spec[i]) * f[i];
  return out;
}

/// (sum_k <mu_k>^s ||P_k f||^2)^{1/2}.
template <class Field>
double sobolev_norm(const Field& f, double s, const SpectrumModel& spec) {
  if (spec.size() < f.size()) throw DimensionMismatch("spectrum shorter than field");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += std::pow(japanese(spec[i]), s) * std::norm(f[i]);
  return std::sqrt(acc);
}

/// Degrees whose coefficients the window does not annihilate.
inline std::vector<int> window_support(const SpectralWindow& w, const SpectrumModel& spec, int k_max) {
  spec.check_covers(k_max);
  std::vector<int> out;
  for (int k = 0; k <= k_max; ++k)
    for (int m = -k; m <= k; ++m)
      if (w.at_eigenvalue(spec.eigenvalue(k, m)) != 0.0) {
        out.push_back(k);
        break;
      }
  return out;
}

/// Sphere degrees k with N <= sqrt(k(k+1)) <= 2N.
inline std::vector<int> dyadic_degrees(double n) {
  std::vector<int> out;
  for (int k = 0; std::sqrt(double(k) * (k + 1)) <= 2.0 * n; ++k)
    if (std::sqrt(double(k) * (k + 1)) >= n) out.push_back(k);
  return out;
}

}  // namespace bispec
