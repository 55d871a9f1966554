#include <gtest/gtest.h>

#include <random>

#include "bispec/arithmetic.hpp"
#include "oracles.hpp"

using namespace bispec;

TEST(SumTwoSquares, SmallValues) {
  EXPECT_EQ(sum_two_squares_count(0), 1);
  EXPECT_EQ(sum_two_squares_count(25), 12);
  EXPECT_EQ(sum_two_squares_count(3), 0);
  EXPECT_EQ(sum_two_squares_count(1), 4);
  EXPECT_THROW(sum_two_squares_count(-1), InvalidParams);
}

TEST(SumTwoSquares, MatchesEnumeration) {
  for (std::int64_t m = 0; m <= 400; ++m) EXPECT_EQ(sum_two_squares_count(m), oracle::r2_brute(m)) << m;
}

TEST(AlphaCount, SpecExamples) {
  EXPECT_EQ(alpha_count(1, 1, 8), 2);
  EXPECT_EQ(alpha_count(1, 1, 4), 1);
  EXPECT_EQ(alpha_count(1, 1, 5), 0);
  EXPECT_EQ(alpha_count(3, 3, -4), 0);
}

TEST(AlphaCount, RandomInstancesMatchBruteForce) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::int64_t> nd(1, 200);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t n = nd(rng), l = nd(rng);
    std::uniform_int_distribution<std::int64_t> kd(n, 2 * n), ld(l, 2 * l);
    // half the instances sit on an achievable tau, half are arbitrary
    const std::int64_t k = kd(rng), j = ld(rng);
    const std::int64_t tau = (i % 2 == 0) ? k * (k + 1) + j * (j + 1)
                                          : std::uniform_int_distribution<std::int64_t>(0, 20 * (n + l) * (n + l))(rng);
    EXPECT_EQ(alpha_count(n, l, tau), oracle::alpha_brute(n, l, tau)) << n << " " << l << " " << tau;
  }
}

TEST(MaxAlphaScan, SmallCases) {
  const auto r = max_alpha_scan(1, 1);
  EXPECT_EQ(r.max_count, 2);
  EXPECT_EQ(r.tau_star, 8);
  for (std::int64_t n = 1; n <= 12; ++n) {
    std::int64_t best = 0;
    for (std::int64_t tau = 0; tau <= 4 * 2 * n * (2 * n + 1); ++tau) best = std::max(best, oracle::alpha_brute(n, n, tau));
    EXPECT_EQ(max_alpha_scan(n, n).max_count, best) << n;
  }
}

TEST(MaxAlphaScan, MonotoneUnderNesting) {
  // [N, 2N] with N = 2M, compared with the count over the wider range M..4M
  for (std::int64_t n : {4, 8, 16}) {
    const auto inner = max_alpha_scan(n, n).max_count;
    std::int64_t outer = 0;
    const auto r = max_alpha_scan(n, n);
    for (std::int64_t k = n / 2; k <= 2 * n; ++k)
      for (std::int64_t j = n / 2; j <= 2 * n; ++j)
        if (k * (k + 1) + j * (j + 1) == r.tau_star) ++outer;
    EXPECT_GE(outer, inner);
  }
}

TEST(MaxAlphaScan, BudgetGuard) {
  EXPECT_THROW(max_alpha_scan(1000, 1000, 1000), ResourceError);
}

TEST(TorusPairCount, SpecExamples) {
  EXPECT_EQ(torus_pair_count(0, 0, 0, 1), 1);
  EXPECT_EQ(torus_pair_count(2, 0, 0, 1), 4);
  EXPECT_EQ(torus_pair_count(1, 2, 0, 1), 0);
}

TEST(TorusPairCount, MatchesBruteForce) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const std::int64_t a = std::uniform_int_distribution<std::int64_t>(1, 9)(rng);
    std::uniform_int_distribution<std::int64_t> pd(-2 * a, 2 * a);
    const std::int64_t p1 = pd(rng), p2 = pd(rng);
    const std::int64_t tau = std::uniform_int_distribution<std::int64_t>(0, 4 * a * a)(rng);
    EXPECT_EQ(torus_pair_count(tau, p1, p2, a), oracle::torus_pairs_brute(tau, p1, p2, a));
  }
}

TEST(TorusSupCount, MatchesBruteForce) {
  for (std::int64_t a = 1; a <= 8; ++a) {
    const auto r = torus_sup_count(a);
    EXPECT_EQ(r.count, oracle::torus_sup_brute(a)) << a;
    EXPECT_EQ(torus_pair_count(r.tau, r.p1, r.p2, a), r.count);
  }
}

TEST(GrowthScans, OrderedRowsAndFit) {
  const auto s = alpha_growth_scan({2, 4, 8, 16, 32}, 1, 2);
  ASSERT_EQ(s.rows.size(), 5u);
  for (std::size_t i = 0; i < s.rows.size(); ++i) EXPECT_EQ(s.rows[i].n, std::int64_t{2} << i);
  EXPECT_GT(s.fit.slope, 0.0);
  const auto t = torus_growth_scan({4, 8, 16, 32});
  EXPECT_EQ(t.rows.front().count, torus_sup_count(4).count);
}
