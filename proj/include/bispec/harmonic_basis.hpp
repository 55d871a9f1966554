#pragma once

// Spectral transforms and exact quadrature on the sphere and the flat torus.
//
// Sphere conventions: orthonormal complex spherical harmonics Y_k^m with the
// Condon-Shortley phase, Y_k^{-m} = (-1)^m conj(Y_k^m). A grid is a product of
// Gauss-Legendre nodes in cos(theta) and uniform longitudes; with n_lat nodes and
// n_lon longitudes it integrates exactly every polynomial of total degree
// <= min(2 n_lat - 1, n_lon - 1).
//
// Torus conventions: period-1 torus, basis e^{2 pi i n.x}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bispec/error.hpp"
#include "bispec/fft.hpp"

namespace bispec {

using cplx = std::complex<double>;
using GridValues = std::vector<cplx>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;

/// Default cap on quadrature nodes for a single grid (~1 GiB of complex samples).
inline constexpr std::size_t kDefaultMaxGridNodes = std::size_t{1} << 26;

// ---------------------------------------------------------------------------
// Gauss-Legendre rule on [-1, 1]
// ---------------------------------------------------------------------------

struct GaussLegendreRule {
  std::vector<double> nodes;    // descending: nodes[0] closest to +1 (north pole)
  std::vector<double> weights;  // sum to 2
};

inline GaussLegendreRule gauss_legendre(std::size_t n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double dk = static_cast<double>(k);
        const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
        p0 = p1;
        p1 = p2;
      }
      dp = dn * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double dk = static_cast<double>(k);
      const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
      p0 = p1;
      p1 = p2;
    }
    dp = (n == 1) ? 1.0 : dn * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = x;
    rule.nodes[n - 1 - i] = -x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

// ---------------------------------------------------------------------------
// SphereGrid
// ---------------------------------------------------------------------------

/// Gauss-Legendre x uniform-longitude grid. Samples are stored ring-major:
/// index = ring * n_lon + longitude.
struct SphereGrid {
  std::size_t n_lat = 0;
  std::size_t n_lon = 0;
  std::vector<double> colatitude;   // theta_j, ascending
  std::vector<double> cos_colat;    // cos(theta_j)
  std::vector<double> ring_weight;  // Gauss weight * 2 pi / n_lon

  std::size_t size() const { return n_lat * n_lon; }
  double longitude(std::size_t p) const {
    return 2.0 * kPi * static_cast<double>(p) / static_cast<double>(n_lon);
  }
  std::pair<double, double> node(std::size_t idx) const {
    return {colatitude[idx / n_lon], longitude(idx % n_lon)};
  }
  double weight(std::size_t idx) const { return ring_weight[idx / n_lon]; }
  std::vector<double> weights() const {
    std::vector<double> w(size());
    for (std::size_t i = 0; i < size(); ++i) w[i] = weight(i);
    return w;
  }
  /// Largest total polynomial degree integrated exactly.
  int exact_degree() const {
    return static_cast<int>(std::min(2 * n_lat - 1, n_lon - 1));
  }
  /// True when products of two fields of degree <= k integrate exactly.
  bool resolves(int k_max) const { return exact_degree() >= 2 * k_max; }
};

inline SphereGrid make_sphere_grid(std::size_t n_lat, std::size_t n_lon,
                                   std::size_t max_nodes = kDefaultMaxGridNodes) {
  require(n_lat >= 1 && n_lon >= 1, "grid needs at least one ring and one longitude");
  if (n_lat * n_lon > max_nodes)
    throw ResourceError("sphere grid of " + std::to_string(n_lat) + "x" + std::to_string(n_lon) +
                        " exceeds node cap " + std::to_string(max_nodes));
  SphereGrid g;
  g.n_lat = n_lat;
  g.n_lon = n_lon;
  const auto rule = gauss_legendre(n_lat);
  g.cos_colat = rule.nodes;
  g.colatitude.resize(n_lat);
  g.ring_weight.resize(n_lat);
  for (std::size_t j = 0; j < n_lat; ++j) {
    g.colatitude[j] = std::acos(rule.nodes[j]);
    g.ring_weight[j] = rule.weights[j] * 2.0 * kPi / static_cast<double>(n_lon);
  }
  return g;
}

/// n_lat = k_max + 1, n_lon = 2 k_max + 2: exact for products of two degree-k_max fields.
inline SphereGrid build_sphere_grid(int k_max, std::size_t max_nodes = kDefaultMaxGridNodes) {
  require(k_max >= 0, "k_max must be nonnegative");
  const auto k = static_cast<std::size_t>(k_max);
  return make_sphere_grid(k + 1, 2 * k + 2, max_nodes);
}

/// Smallest grid (with an FFT-friendly longitude count) integrating polynomials of
/// total degree `degree` exactly.
inline SphereGrid build_product_grid(int degree, std::size_t max_nodes = kDefaultMaxGridNodes) {
  require(degree >= 0, "degree must be nonnegative");
  const auto d = static_cast<std::size_t>(degree);
  std::size_t n_lon = next_smooth_size(d + 1);
  if (n_lon % 2 == 1) n_lon = next_smooth_size(n_lon + 1);
  return make_sphere_grid(d / 2 + 1, n_lon, max_nodes);
}

// ---------------------------------------------------------------------------
// HarmonicField
// ---------------------------------------------------------------------------

/// Coefficients c_{k,m}, 0 <= k <= k_max, |m| <= k, flat index k^2 + k + m.
class HarmonicField {
 public:
  HarmonicField() = default;
  explicit HarmonicField(int k_max) : k_max_(k_max) {
    require(k_max >= 0, "k_max must be nonnegative");
    coeffs_.assign(count(k_max), cplx{});
  }

  static std::size_t count(int k_max) {
    return static_cast<std::size_t>(k_max + 1) * static_cast<std::size_t>(k_max + 1);
  }
  static std::size_t index(int k, int m) {
    return static_cast<std::size_t>(k * k + k + m);
  }
  static int degree_of(std::size_t idx) {
    int k = static_cast<int>(std::sqrt(static_cast<double>(idx)));
    while (k * k > static_cast<int>(idx)) --k;
    while ((k + 1) * (k + 1) <= static_cast<int>(idx)) ++k;
    return k;
  }

  int k_max() const { return k_max_; }
  std::size_t size() const { return coeffs_.size(); }

  cplx& operator()(int k, int m) { return coeffs_[index(k, m)]; }
  const cplx& operator()(int k, int m) const { return coeffs_[index(k, m)]; }
  cplx& operator[](std::size_t i) { return coeffs_[i]; }
  const cplx& operator[](std::size_t i) const { return coeffs_[i]; }

  std::span<cplx> coeffs() { return coeffs_; }
  std::span<const cplx> coeffs() const { return coeffs_; }

  /// L^2(S^2) norm, exact by orthonormality.
  double norm() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return std::sqrt(s);
  }

  /// Same coefficients in a larger or smaller degree range (truncating).
  HarmonicField resized(int k_max) const {
    HarmonicField out(k_max);
    const std::size_t n = std::min(size(), out.size());
    std::copy_n(coeffs_.begin(), n, out.coeffs_.begin());
    return out;
  }

  HarmonicField& operator+=(const HarmonicField& o) {
    if (o.k_max_ != k_max_) throw DimensionMismatch("field degree ranges differ");
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  HarmonicField& operator-=(const HarmonicField& o) {
    if (o.k_max_ != k_max_) throw DimensionMismatch("field degree ranges differ");
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  HarmonicField& operator*=(cplx a) {
    for (auto& c : coeffs_) c *= a;
    return *this;
  }
  friend HarmonicField operator+(HarmonicField a, const HarmonicField& b) { return a += b; }
  friend HarmonicField operator-(HarmonicField a, const HarmonicField& b) { return a -= b; }
  friend HarmonicField operator*(cplx s, HarmonicField a) { return a *= s; }

 private:
  int k_max_ = -1;
  std::vector<cplx> coeffs_;
};

/// <f, g> = sum conj(f) g over the common range.
inline cplx dot(const HarmonicField& f, const HarmonicField& g) {
  const std::size_t n = std::min(f.size(), g.size());
  cplx s{};
  for (std::size_t i = 0; i < n; ++i) s += std::conj(f[i]) * g[i];
  return s;
}

inline double max_abs_diff(const HarmonicField& f, const HarmonicField& g) {
  const std::size_t n = std::max(f.size(), g.size());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx a = i < f.size() ? f[i] : cplx{};
    const cplx b = i < g.size() ? g[i] : cplx{};
    d = std::max(d, std::abs(a - b));
  }
  return d;
}

/// Unit-norm field with i.i.d. complex Gaussian coefficients in degrees [k_lo, k_hi].
template <class Rng>
HarmonicField random_field(int k_lo, int k_hi, Rng& rng, int k_max = -1) {
  require(0 <= k_lo && k_lo <= k_hi, "random_field: need 0 <= k_lo <= k_hi");
  HarmonicField f(k_max < 0 ? k_hi : k_max);
  require(f.k_max() >= k_hi, "random_field: k_max below k_hi");
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = k_lo; k <= k_hi; ++k)
    for (int m = -k; m <= k; ++m) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      f(k, m) = {re, im};
    }
  f *= 1.0 / f.norm();
  return f;
}

// ---------------------------------------------------------------------------
// Normalized associated Legendre functions
// ---------------------------------------------------------------------------

/// Values Pbar_k^m(cos theta_j) for 0 <= m <= k <= k_max on a set of colatitudes,
/// normalized so that Y_k^m = Pbar_k^m(cos theta) e^{i m phi} is L^2(S^2)-orthonormal
/// (Condon-Shortley phase included).
///
/// Computed column by column (fixed m) with the standard three-term recurrence in k.
/// The seed Pbar_m^m ~ sin^m(theta) is carried as mantissa * 2^exponent so that
/// high orders near the poles neither overflow nor lose the recurrence to underflow.
class LegendreTable {
 public:
  LegendreTable() = default;
  LegendreTable(std::span<const double> cos_theta, int k_max)
      : k_max_(k_max), n_(cos_theta.size()) {
    require(k_max >= 0, "LegendreTable: k_max must be nonnegative");
    offsets_.resize(static_cast<std::size_t>(k_max) + 2);
    std::size_t off = 0;
    for (int m = 0; m <= k_max; ++m) {
      offsets_[m] = off;
      off += static_cast<std::size_t>(k_max - m + 1) * n_;
    }
    offsets_[k_max + 1] = off;
    values_.assign(off, 0.0);

    // log of sqrt(prod_{i=1..m} (2i-1)/(2i)), accumulated in m
    std::vector<double> log_seed(static_cast<std::size_t>(k_max) + 1, 0.0);
    for (int m = 1; m <= k_max; ++m)
      log_seed[m] = log_seed[m - 1] + 0.5 * std::log((2.0 * m - 1.0) / (2.0 * m));

    for (std::size_t j = 0; j < n_; ++j) {
      const double x = cos_theta[j];
      const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
      const double log_s = s > 0.0 ? std::log(s) : -std::numeric_limits<double>::infinity();
      for (int m = 0; m <= k_max; ++m) {
        const double lv = 0.5 * std::log((2.0 * m + 1.0) / kFourPi) + log_seed[m] +
                          (m > 0 ? m * log_s : 0.0);
        if (!std::isfinite(lv)) continue;  // pole: zero for m > 0
        int e = static_cast<int>(std::floor(lv / std::numbers::ln2));
        double p = std::exp(lv - e * std::numbers::ln2);
        if (m % 2 == 1) p = -p;
        double p_prev = 0.0;
        at(m, m, j) = std::ldexp(p, e);
        for (int k = m + 1; k <= k_max; ++k) {
          double p_next;
          if (k == m + 1) {
            p_next = x * std::sqrt(2.0 * m + 3.0) * p;
          } else {
            const double dk = k, dm = m;
            const double a = std::sqrt((4.0 * dk * dk - 1.0) / (dk * dk - dm * dm));
            const double b =
                std::sqrt(((dk - 1.0) * (dk - 1.0) - dm * dm) / (4.0 * (dk - 1.0) * (dk - 1.0) - 1.0));
            p_next = a * (x * p - b * p_prev);
          }
          p_prev = p;
          p = p_next;
          const double mag = std::abs(p);
          if (mag > 0x1p+400 || (mag < 0x1p-400 && mag > 0.0)) {
            const int shift = std::ilogb(mag);
            p = std::ldexp(p, -shift);
            p_prev = std::ldexp(p_prev, -shift);
            e += shift;
          }
          at(k, m, j) = std::ldexp(p, e);
        }
      }
    }
  }

  int k_max() const { return k_max_; }
  std::size_t points() const { return n_; }

  /// Contiguous span over the points for fixed (k, m >= 0).
  std::span<const double> column(int k, int m) const {
    return {values_.data() + offsets_[m] + static_cast<std::size_t>(k - m) * n_, n_};
  }
  double operator()(int k, int m, std::size_t j) const {
    return values_[offsets_[m] + static_cast<std::size_t>(k - m) * n_ + j];
  }

 private:
  double& at(int k, int m, std::size_t j) {
    return values_[offsets_[m] + static_cast<std::size_t>(k - m) * n_ + j];
  }

  int k_max_ = -1;
  std::size_t n_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

/// Y_k^m evaluated at one point; independent of any grid.
inline cplx spherical_harmonic(int k, int m, double theta, double phi) {
  const double c = std::cos(theta);
  const LegendreTable t(std::span<const double>(&c, 1), k);
  const int am = std::abs(m);
  double p = t(k, am, 0);
  if (m < 0 && (am % 2 == 1)) p = -p;
  return p * std::polar(1.0, m * phi);
}

// ---------------------------------------------------------------------------
// SphereTransform
// ---------------------------------------------------------------------------

/// Synthesis/analysis between HarmonicField (degree <= k_max) and samples on one grid.
/// Analysis is the Gauss quadrature projection; it is the exact inverse of synthesis
/// whenever grid.resolves(k_max).
class SphereTransform {
 public:
  SphereTransform() = default;
  SphereTransform(SphereGrid grid, int k_max)
      : grid_(std::make_shared<const SphereGrid>(std::move(grid))), k_max_(k_max) {
    require(k_max >= 0, "transform k_max must be nonnegative");
    if (grid_->n_lon < static_cast<std::size_t>(2 * k_max + 1))
      throw ResolutionError("n_lon=" + std::to_string(grid_->n_lon) +
                            " cannot represent orders up to " + std::to_string(k_max));
    legendre_ = std::make_shared<const LegendreTable>(grid_->cos_colat, k_max);
    fft_ = BatchedFft(grid_->n_lon, grid_->n_lat);
  }

  const SphereGrid& grid() const { return *grid_; }
  int k_max() const { return k_max_; }
  const LegendreTable& legendre() const { return *legendre_; }

  /// Pointwise values sum_{k_lo<=k<=k_hi} c_{k,m} Y_k^m.
  GridValues synthesize(const HarmonicField& f, int k_lo = 0, int k_hi = -1) const {
    if (k_hi < 0) k_hi = f.k_max();
    k_hi = std::min(k_hi, f.k_max());
    if (k_hi > k_max_)
      throw DimensionMismatch("field degree " + std::to_string(k_hi) +
                              " exceeds transform k_max " + std::to_string(k_max_));
    const auto& g = *grid_;
    GridValues rings(g.size(), cplx{});
    if (k_lo > k_hi) return rings;
    for (int m = -k_hi; m <= k_hi; ++m) {
      const int am = std::abs(m);
      const double sgn = (m < 0 && am % 2 == 1) ? -1.0 : 1.0;
      const std::size_t col = static_cast<std::size_t>((m % int(g.n_lon) + int(g.n_lon)) % int(g.n_lon));
      for (int k = std::max(am, k_lo); k <= k_hi; ++k) {
        const cplx c = sgn * f(k, m);
        if (c == cplx{}) continue;
        const auto p = legendre_->column(k, am);
        for (std::size_t j = 0; j < g.n_lat; ++j) rings[j * g.n_lon + col] += c * p[j];
      }
    }
    fft_.backward(rings);
    return rings;
  }

  /// Quadrature projection onto degrees [k_lo, k_hi]; coefficients outside are zero.
  /// out_k_max defaults to k_hi.
  HarmonicField analyze(GridValues values, int k_lo = 0, int k_hi = -1, int out_k_max = -1) const {
    const auto& g = *grid_;
    if (values.size() != g.size())
      throw DimensionMismatch("sample count " + std::to_string(values.size()) + " vs grid " +
                              std::to_string(g.size()));
    if (k_hi < 0) k_hi = k_max_;
    if (k_hi > k_max_) throw DimensionMismatch("analysis degree exceeds transform k_max");
    HarmonicField out(out_k_max < 0 ? k_hi : out_k_max);
    if (out.k_max() < k_hi) throw DimensionMismatch("output field too small");
    fft_.forward(values);
    for (std::size_t j = 0; j < g.n_lat; ++j) {
      const double w = g.ring_weight[j];
      for (std::size_t p = 0; p < g.n_lon; ++p) values[j * g.n_lon + p] *= w;
    }
    for (int m = -k_hi; m <= k_hi; ++m) {
      const int am = std::abs(m);
      const double sgn = (m < 0 && am % 2 == 1) ? -1.0 : 1.0;
      const std::size_t col = static_cast<std::size_t>((m % int(g.n_lon) + int(g.n_lon)) % int(g.n_lon));
      for (int k = std::max(am, k_lo); k <= k_hi; ++k) {
        const auto p = legendre_->column(k, am);
        cplx s{};
        for (std::size_t j = 0; j < g.n_lat; ++j) s += values[j * g.n_lon + col] * p[j];
        out(k, m) = sgn * s;
      }
    }
    return out;
  }

 private:
  std::shared_ptr<const SphereGrid> grid_;
  int k_max_ = -1;
  std::shared_ptr<const LegendreTable> legendre_;
  BatchedFft fft_;
};

/// Grid values of a field.
inline GridValues sh_synthesize(const HarmonicField& field, const SphereGrid& grid) {
  if (!grid.resolves(field.k_max()) && grid.n_lon < std::size_t(2 * field.k_max() + 1))
    throw ResolutionError("grid cannot represent degree " + std::to_string(field.k_max()));
  return SphereTransform(grid, field.k_max()).synthesize(field);
}

/// Orthonormal coefficients up to k_max from samples on a grid resolving k_max.
inline HarmonicField sh_analyze(const GridValues& samples, const SphereGrid& grid, int k_max) {
  if (samples.size() != grid.size())
    throw DimensionMismatch("sample count " + std::to_string(samples.size()) + " vs grid " +
                            std::to_string(grid.size()));
  if (!grid.resolves(k_max))
    throw ResolutionError("grid " + std::to_string(grid.n_lat) + "x" + std::to_string(grid.n_lon) +
                          " does not resolve degree " + std::to_string(k_max));
  return SphereTransform(grid, k_max).analyze(samples, 0, k_max);
}

/// Unit-norm highest-weight harmonic proportional to (x1 + i x2)^n.
/// (x1 + i x2)^n = sin^n(theta) e^{i n phi} = (-1)^n Y_n^n / c_n with c_n > 0.
inline HarmonicField make_highest_weight(int n, int k_max = -1) {
  require(n >= 0, "highest-weight degree must be nonnegative");
  HarmonicField f(k_max < 0 ? n : k_max);
  require(f.k_max() >= n, "k_max below highest-weight degree");
  f(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  return f;
}

/// Squared L^2 norm of the unnormalized (x1 + i x2)^n:  2 pi * 2^{2n+1} (n!)^2 / (2n+1)!.
inline double highest_weight_norm_squared(int n) {
  const double dn = n;
  const double log_w = (2.0 * dn + 1.0) * std::numbers::ln2 + 2.0 * std::lgamma(dn + 1.0) -
                       std::lgamma(2.0 * dn + 2.0);
  return 2.0 * kPi * std::exp(log_w);
}

// ---------------------------------------------------------------------------
// Quadrature of products
// ---------------------------------------------------------------------------

struct QuadratureResult {
  cplx value;
  bool exact;  // false when the declared total degree exceeds grid exactness
};

/// Quadrature of prod_i fields_i over the sphere. `total_degree`, when given, is
/// checked against the grid's exactness bound.
inline QuadratureResult integrate_product(std::span<const GridValues> fields, const SphereGrid& grid,
                                          int total_degree = -1) {
  require(!fields.empty(), "integrate_product needs at least one field");
  for (const auto& f : fields)
    if (f.size() != grid.size()) throw DimensionMismatch("field sampled on a different grid");
  cplx s{};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    cplx p = fields[0][i];
    for (std::size_t q = 1; q < fields.size(); ++q) p *= fields[q][i];
    s += grid.weight(i) * p;
  }
  return {s, total_degree < 0 || total_degree <= grid.exact_degree()};
}

// ---------------------------------------------------------------------------
// Torus
// ---------------------------------------------------------------------------

/// Coefficients c_{n1,n2}, |n1|,|n2| <= A, of sum c e^{2 pi i (n1 x1 + n2 x2)}.
class TorusField {
 public:
  TorusField() = default;
  explicit TorusField(int half_width) : a_(half_width) {
    require(half_width >= 0, "torus half-width must be nonnegative");
    coeffs_.assign(count(half_width), cplx{});
  }

  static std::size_t count(int a) {
    return static_cast<std::size_t>(2 * a + 1) * static_cast<std::size_t>(2 * a + 1);
  }
  std::size_t index(int n1, int n2) const {
    return static_cast<std::size_t>(n1 + a_) * static_cast<std::size_t>(2 * a_ + 1) +
           static_cast<std::size_t>(n2 + a_);
  }
  std::pair<int, int> mode(std::size_t idx) const {
    const int w = 2 * a_ + 1;
    return {static_cast<int>(idx) / w - a_, static_cast<int>(idx) % w - a_};
  }

  int half_width() const { return a_; }
  std::size_t size() const { return coeffs_.size(); }
  cplx& operator()(int n1, int n2) { return coeffs_[index(n1, n2)]; }
  const cplx& operator()(int n1, int n2) const { return coeffs_[index(n1, n2)]; }
  cplx& operator[](std::size_t i) { return coeffs_[i]; }
  const cplx& operator[](std::size_t i) const { return coeffs_[i]; }
  std::span<cplx> coeffs() { return coeffs_; }
  std::span<const cplx> coeffs() const { return coeffs_; }

  double norm() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return std::sqrt(s);
  }

  TorusField& operator+=(const TorusField& o) {
    if (o.a_ != a_) throw DimensionMismatch("torus half-widths differ");
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  TorusField& operator-=(const TorusField& o) {
    if (o.a_ != a_) throw DimensionMismatch("torus half-widths differ");
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  TorusField& operator*=(cplx s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  friend TorusField operator+(TorusField a, const TorusField& b) { return a += b; }
  friend TorusField operator-(TorusField a, const TorusField& b) { return a -= b; }
  friend TorusField operator*(cplx s, TorusField a) { return a *= s; }

 private:
  int a_ = -1;
  std::vector<cplx> coeffs_;
};

inline cplx dot(const TorusField& f, const TorusField& g) {
  if (f.half_width() != g.half_width()) throw DimensionMismatch("torus half-widths differ");
  cplx s{};
  for (std::size_t i = 0; i < f.size(); ++i) s += std::conj(f[i]) * g[i];
  return s;
}

/// Uniform G x G grid on the unit torus; node (p, q) = (p/G, q/G), row-major in p.
struct TorusGrid {
  std::size_t n = 0;
  std::size_t size() const { return n * n; }
  double weight() const { return 1.0 / static_cast<double>(n * n); }
  /// Largest total trigonometric degree (per axis) integrated exactly.
  int exact_degree() const { return static_cast<int>(n) - 1; }
};

inline TorusGrid build_torus_grid(int half_width, std::size_t max_nodes = kDefaultMaxGridNodes) {
  require(half_width >= 0, "torus half-width must be nonnegative");
  const std::size_t n = 2 * static_cast<std::size_t>(half_width) + 2;
  if (n * n > max_nodes) throw ResourceError("torus grid exceeds node cap");
  return {n};
}

/// Grid resolving products of total per-axis degree `degree`, FFT-friendly size.
inline TorusGrid build_torus_product_grid(int degree) {
  std::size_t n = next_smooth_size(static_cast<std::size_t>(degree) + 1);
  if (n % 2 == 1) n = next_smooth_size(n + 1);
  return {n};
}

inline GridValues torus_synthesize(const TorusField& field, const TorusGrid& grid) {
  const int a = field.half_width();
  const auto g = static_cast<int>(grid.n);
  if (g < 2 * a + 1) throw ResolutionError("torus grid aliases modes of half-width " + std::to_string(a));
  GridValues v(grid.size(), cplx{});
  for (int n1 = -a; n1 <= a; ++n1)
    for (int n2 = -a; n2 <= a; ++n2) {
      const std::size_t r = static_cast<std::size_t>((n1 % g + g) % g);
      const std::size_t c = static_cast<std::size_t>((n2 % g + g) % g);
      v[r * grid.n + c] = field(n1, n2);
    }
  SquareFft(grid.n).backward(v);
  return v;
}

/// Exact discrete Fourier coefficients for |n_j| <= A. Requires the grid to hold at
/// least (2A+2)^2 points.
inline TorusField torus_analyze(GridValues samples, const TorusGrid& grid, int half_width) {
  if (samples.size() != grid.size()) throw DimensionMismatch("torus sample count vs grid");
  const auto g = static_cast<int>(grid.n);
  if (g < 2 * half_width + 2)
    throw ResolutionError("torus grid of side " + std::to_string(g) + " under-resolves A=" +
                          std::to_string(half_width));
  SquareFft(grid.n).forward(samples);
  TorusField out(half_width);
  const double scale = grid.weight();
  for (int n1 = -half_width; n1 <= half_width; ++n1)
    for (int n2 = -half_width; n2 <= half_width; ++n2) {
      const std::size_t r = static_cast<std::size_t>((n1 % g + g) % g);
      const std::size_t c = static_cast<std::size_t>((n2 % g + g) % g);
      out(n1, n2) = scale * samples[r * grid.n + c];
    }
  return out;
}

}  // namespace bispec
