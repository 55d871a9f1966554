#pragma once

// Independent reference values for the tests. Nothing here calls into bispec.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <algorithm>
#include <cstdlib>
#include <utility>
#include <vector>

namespace oracle {

/// W_m = int_0^pi sin^m(theta) d theta by the Wallis recursion W_m = (m-1)/m W_{m-2}.
inline double wallis(int m) {
  double w0 = std::numbers::pi, w1 = 2.0;
  if (m == 0) return w0;
  if (m == 1) return w1;
  double a = w0, b = w1;  // W_{j-2}, W_{j-1}
  for (int j = 2; j <= m; ++j) {
    const double c = (j - 1.0) / j * a;
    a = b;
    b = c;
  }
  return b;
}

/// int_{S^2} |x1 + i x2|^{m} d sigma = 2 pi W_{m+1}.
inline double highest_weight_moment(int m) { return 2.0 * std::numbers::pi * wallis(m + 1); }

/// ||phi_n||_4 / ||phi_n||_2 for the unnormalized highest-weight harmonic.
inline double sogge_l4_ratio(int n) {
  return std::pow(highest_weight_moment(4 * n), 0.25) / std::sqrt(highest_weight_moment(2 * n));
}

/// ||phi_n phi_l||_2 / (||phi_n||_2 ||phi_l||_2).
inline double highest_weight_product(int n, int l) {
  return std::sqrt(highest_weight_moment(2 * (n + l)) / (highest_weight_moment(2 * n) * highest_weight_moment(2 * l)));
}

/// Orthonormal Y_k^m from the C++17 special function (Condon-Shortley phase included).
inline std::complex<double> ylm(int k, int m, double theta, double phi) {
  const int am = m < 0 ? -m : m;
  double p = std::sph_legendre(static_cast<unsigned>(k), static_cast<unsigned>(am), theta);
  if (m < 0 && am % 2 == 1) p = -p;
  return p * std::polar(1.0, m * phi);
}

inline std::int64_t r2_brute(std::int64_t m) {
  std::int64_t c = 0;
  for (std::int64_t a = -m; a <= m; ++a)
    for (std::int64_t b = -m; b <= m; ++b)
      if (a * a + b * b == m) ++c;
  return m == 0 ? 1 : c;
}

/// #{(k, l) : N <= k <= 2N, L <= l <= 2L, k(k+1) + l(l+1) = tau}.
inline std::int64_t alpha_brute(std::int64_t n, std::int64_t l, std::int64_t tau) {
  std::int64_t c = 0;
  for (std::int64_t k = n; k <= 2 * n; ++k)
    for (std::int64_t j = l; j <= 2 * l; ++j)
      if (k * (k + 1) + j * (j + 1) == tau) ++c;
  return c;
}

/// #{(q, r) in ([-A, A]^2)^2 : |q|^2 + |r|^2 = tau, q + r = p}.
inline std::int64_t torus_pairs_brute(std::int64_t tau, std::int64_t p1, std::int64_t p2, std::int64_t a) {
  std::int64_t c = 0;
  for (std::int64_t q1 = -a; q1 <= a; ++q1)
    for (std::int64_t q2 = -a; q2 <= a; ++q2) {
      const std::int64_t r1 = p1 - q1, r2 = p2 - q2;
      if (std::abs(r1) > a || std::abs(r2) > a) continue;
      if (q1 * q1 + q2 * q2 + r1 * r1 + r2 * r2 == tau) ++c;
    }
  return c;
}

/// sup over (tau, p) of torus_pairs_brute.
inline std::int64_t torus_sup_brute(std::int64_t a) {
  std::int64_t best = 0;
  std::vector<std::int64_t> hist;
  for (std::int64_t p1 = -2 * a; p1 <= 2 * a; ++p1)
    for (std::int64_t p2 = -2 * a; p2 <= 2 * a; ++p2) {
      hist.assign(static_cast<std::size_t>(4 * a * a + 1), 0);
      for (std::int64_t q1 = -a; q1 <= a; ++q1)
        for (std::int64_t q2 = -a; q2 <= a; ++q2) {
          const std::int64_t r1 = p1 - q1, r2 = p2 - q2;
          if (std::abs(r1) > a || std::abs(r2) > a) continue;
          ++hist[static_cast<std::size_t>(q1 * q1 + q2 * q2 + r1 * r1 + r2 * r2)];
        }
      for (auto h : hist) best = std::max(best, h);
    }
  return best;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<std::pair<double, double>>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(pts.size());
  for (const auto& [x, y] : pts) {
    const double lx = std::log(x), ly = std::log(y);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
