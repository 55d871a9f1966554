#pragma once

// Exact lattice counts: representations as sums of two squares, the pair counts
//   alpha_{N,L}(tau) = #{(k,l) : N<=k<=2N, L<=l<=2L, k(k+1) + l(l+1) = tau}
// and the torus quadruple counts |I_{tau,p1,p2}|.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "bispec/error.hpp"
#include "bispec/fit.hpp"
#include "bispec/parallel.hpp"

namespace bispec {

struct LatticeCount {
  std::int64_t n = 0;  // N, or A for torus counts
  std::int64_t l = 0;  // L (unused for torus counts)
  std::int64_t p1 = 0;
  std::int64_t p2 = 0;
  std::int64_t tau = 0;
  std::int64_t count = 0;
};

namespace detail {

inline bool mul_overflows(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  return __builtin_mul_overflow(a, b, &r);
}

/// floor(sqrt(x)) for x >= 0, exact.
inline std::int64_t isqrt(std::int64_t x) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(x)));
  while (r > 0 && (r > x / r)) --r;
  while ((r + 1) <= x / (r + 1)) ++r;
  return r;
}

inline bool is_square(std::int64_t x, std::int64_t& root) {
  if (x < 0) return false;
  root = isqrt(x);
  return root * root == x;
}

}  // namespace detail

/// r_2(M) = #{(a, b) in Z^2 : a^2 + b^2 = M}, via trial-division factorization:
/// r_2(M) = 4 prod_{p = 1 mod 4} (e_p + 1) when every p = 3 mod 4 has even exponent, else 0.
inline std::int64_t sum_two_squares_count(std::int64_t m) {
  if (m < 0) throw InvalidParams("sum_two_squares_count: M must be nonnegative");
  if (m == 0) return 1;
  std::int64_t r = 4;
  while (m % 2 == 0) m /= 2;
  for (std::int64_t p = 3; p <= m / p; p += 2) {
    if (m % p != 0) continue;
    int e = 0;
    while (m % p == 0) m /= p, ++e;
    if (p % 4 == 3) {
      if (e % 2 == 1) return 0;
    } else {
      r *= (e + 1);
    }
  }
  if (m > 1) {
    if (m % 4 == 3) return 0;
    r *= 2;
  }
  return r;
}

/// alpha_{N,L}(tau) through 4 tau + 2 = (2k+1)^2 + (2l+1)^2.
inline std::int64_t alpha_count(std::int64_t n, std::int64_t l, std::int64_t tau) {
  require(n >= 1 && l >= 1, "alpha_count needs N, L >= 1");
  if (tau < 0) return 0;
  if (tau > (std::numeric_limits<std::int64_t>::max() - 2) / 4)
    throw InvalidParams("alpha_count: 4 tau + 2 overflows");
  const std::int64_t target = 4 * tau + 2;
  std::int64_t count = 0;
  for (std::int64_t k = n; k <= 2 * n; ++k) {
    const std::int64_t a = 2 * k + 1;
    if (a > target / a) break;
    std::int64_t b;
    if (!detail::is_square(target - a * a, b) || b % 2 == 0) continue;
    const std::int64_t ll = (b - 1) / 2;
    if (ll >= l && ll <= 2 * l) ++count;
  }
  return count;
}

struct AlphaScanResult {
  std::int64_t tau_star = 0;
  std::int64_t max_count = 0;
};

/// Pair count budget for max_alpha_scan.
inline constexpr std::int64_t kAlphaScanBudget = 1'000'000'000;

/// sup_tau alpha_{N,L}(tau) by direct enumeration of (k, l) into a count table over
/// the achievable tau range; ties resolve to the smallest tau.
inline AlphaScanResult max_alpha_scan(std::int64_t n, std::int64_t l, std::int64_t budget = kAlphaScanBudget) {
  require(n >= 1 && l >= 1, "max_alpha_scan needs N, L >= 1");
  if ((n + 1) > budget / (l + 1)) throw ResourceError("max_alpha_scan exceeds its work budget");
  const std::int64_t tau_lo = n * (n + 1) + l * (l + 1);
  const std::int64_t tau_hi = 2 * n * (2 * n + 1) + 2 * l * (2 * l + 1);
  const std::int64_t span = tau_hi - tau_lo + 1;
  if (span > (std::int64_t{1} << 31)) throw ResourceError("max_alpha_scan tau range too large");
  std::vector<std::uint16_t> counts(static_cast<std::size_t>(span), 0);
  for (std::int64_t k = n; k <= 2 * n; ++k)
    for (std::int64_t j = l; j <= 2 * l; ++j) ++counts[static_cast<std::size_t>(k * (k + 1) + j * (j + 1) - tau_lo)];
  AlphaScanResult res;
  for (std::int64_t i = 0; i < span; ++i)
    if (counts[static_cast<std::size_t>(i)] > res.max_count) {
      res.max_count = counts[static_cast<std::size_t>(i)];
      res.tau_star = tau_lo + i;
    }
  return res;
}

/// |I_{tau,p1,p2}|: quadruples with q1^2+q2^2+r1^2+r2^2 = tau, q_j + r_j = p_j,
/// |q_j|, |r_j| <= A. Uses 2 tau - p1^2 - p2^2 = s1^2 + s2^2 with s_j = 2 q_j - p_j,
/// s_j = p_j (mod 2) and |s_j| <= 2A - |p_j|.
inline std::int64_t torus_pair_count(std::int64_t tau, std::int64_t p1, std::int64_t p2, std::int64_t a) {
  require(a >= 0, "torus_pair_count needs A >= 0");
  require(std::abs(p1) <= 2 * a && std::abs(p2) <= 2 * a, "torus_pair_count needs |p_j| <= 2A");
  if (tau < 0 || tau > std::numeric_limits<std::int64_t>::max() / 4) return 0;
  const std::int64_t m = 2 * tau - p1 * p1 - p2 * p2;
  if (m < 0) return 0;
  if (sum_two_squares_count(m) == 0) return 0;
  const std::int64_t b1 = 2 * a - std::abs(p1);
  const std::int64_t b2 = 2 * a - std::abs(p2);
  std::int64_t count = 0;
  const std::int64_t lim = std::min(b1, detail::isqrt(m));
  for (std::int64_t s1 = -lim; s1 <= lim; ++s1) {
    if (((s1 - p1) % 2) != 0) continue;
    std::int64_t s2;
    if (!detail::is_square(m - s1 * s1, s2)) continue;
    if (s2 > b2 || ((s2 - p2) % 2) != 0) continue;
    count += (s2 == 0) ? 1 : 2;
  }
  return count;
}

struct TorusSupResult {
  std::int64_t tau = 0;
  std::int64_t p1 = 0;
  std::int64_t p2 = 0;
  std::int64_t count = 0;
};

/// sup over (tau, p1, p2) of |I_{tau,p1,p2}| for fixed A. The admissible s-box
/// |s_j| <= 2A - |p_j| shrinks with |p_j| while only the parity of p_j enters the
/// congruence, so the sup is attained with p_j in {0, 1}.
inline TorusSupResult torus_sup_count(std::int64_t a) {
  require(a >= 0, "torus_sup_count needs A >= 0");
  TorusSupResult best;
  for (std::int64_t p1 = 0; p1 <= std::min<std::int64_t>(1, 2 * a); ++p1)
    for (std::int64_t p2 = 0; p2 <= std::min<std::int64_t>(1, 2 * a); ++p2) {
      const std::int64_t b1 = 2 * a - p1, b2 = 2 * a - p2;
      std::vector<std::int32_t> hist(static_cast<std::size_t>(b1 * b1 + b2 * b2 + 1), 0);
      for (std::int64_t s1 = -b1; s1 <= b1; ++s1) {
        if (((s1 - p1) % 2) != 0) continue;
        for (std::int64_t s2 = -b2; s2 <= b2; ++s2) {
          if (((s2 - p2) % 2) != 0) continue;
          ++hist[static_cast<std::size_t>(s1 * s1 + s2 * s2)];
        }
      }
      for (std::size_t m = 0; m < hist.size(); ++m) {
        // 2 tau = m + p1^2 + p2^2 must be even for tau to be an integer
        if ((static_cast<std::int64_t>(m) + p1 + p2) % 2 != 0) continue;
        if (hist[m] > best.count) {
          best.count = hist[m];
          best.p1 = p1;
          best.p2 = p2;
          best.tau = (static_cast<std::int64_t>(m) + p1 * p1 + p2 * p2) / 2;
        }
      }
    }
  return best;
}

struct AlphaGrowthScan {
  std::vector<LatticeCount> rows;  // n = N, l = L, tau = tau*, count = max count
  PowerLawFit fit;                 // log max count against log N
};

inline AlphaGrowthScan alpha_growth_scan(const std::vector<std::int64_t>& ns, std::int64_t l_ratio,
                                         unsigned threads = 1) {
  require(l_ratio >= 1, "l_ratio must be >= 1");
  AlphaGrowthScan out;
  out.rows.resize(ns.size());
  parallel_for(ns.size(), threads, [&](std::size_t i) {
    const auto r = max_alpha_scan(ns[i], l_ratio * ns[i]);
    out.rows[i] = {ns[i], l_ratio * ns[i], 0, 0, r.tau_star, r.max_count};
  });
  if (ns.size() >= 4) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : out.rows) pts.emplace_back(double(r.n), double(r.count));
    out.fit = fit_growth_exponent(pts);
  }
  return out;
}

struct TorusGrowthScan {
  std::vector<LatticeCount> rows;  // n = A, (p1, p2, tau) attaining the sup
  PowerLawFit fit;                 // log sup count against log A
};

inline TorusGrowthScan torus_growth_scan(const std::vector<std::int64_t>& as, unsigned threads = 1) {
  TorusGrowthScan out;
  out.rows.resize(as.size());
  parallel_for(as.size(), threads, [&](std::size_t i) {
    const auto r = torus_sup_count(as[i]);
    out.rows[i] = {as[i], 0, r.p1, r.p2, r.tau, r.count};
  });
  if (as.size() >= 4) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : out.rows) pts.emplace_back(double(r.n), double(r.count));
    out.fit = fit_growth_exponent(pts);
  }
  return out;
}

}  // namespace bispec
