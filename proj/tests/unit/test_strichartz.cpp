#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "bispec/strichartz.hpp"
#include "oracles.hpp"

using namespace bispec;
using std::numbers::pi;

namespace {

HarmonicField y(int kmax, int k, int m) {
  HarmonicField f(kmax);
  f(k, m) = 1.0;
  return f;
}

double sphere_quad(const HarmonicField& u, const HarmonicField& v, double T, int nt) {
  const int k = std::max(u.k_max(), v.k_max());
  return bilinear_strichartz(u.resized(k), v.resized(k), T, nt, SpectrumModel::sphere_exact(k),
                             build_product_grid(4 * k))
      .value;
}

}  // namespace

TEST(SphereStrichartz, ConstantData) {
  const auto c = y(0, 0, 0);
  for (double T : {0.5, 2 * pi}) EXPECT_NEAR(sphere_quad(c, c, T, 8), std::sqrt(T / (4 * pi)), 1e-14);
  EXPECT_NEAR(strichartz_parseval_sphere(c, c).value, std::sqrt(0.5), 1e-14);
}

TEST(SphereStrichartz, SingleTauTerm) {
  // ||Y_1^0 Y_2^0||_2 from an independent Gauss rule with std::sph_legendre samples
  const auto g = build_product_grid(6);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto [th, ph] = g.node(i);
    s += g.weight(i) * std::norm(oracle::ylm(1, 0, th, ph) * oracle::ylm(2, 0, th, ph));
  }
  const double expect = std::sqrt(2 * pi) * std::sqrt(s);
  EXPECT_NEAR(strichartz_parseval_sphere(y(1, 1, 0), y(2, 2, 0)).value, expect, 1e-13);
  EXPECT_NEAR(sphere_quad(y(1, 1, 0), y(2, 2, 0), 2 * pi, 64), expect, 1e-12);
}

TEST(SphereStrichartz, QuadratureMatchesParseval) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 6; ++trial) {
    const int ku = 2 + trial, kv = 5 + 2 * trial;
    const auto u = random_field(ku / 2, ku, rng);
    const auto v = random_field(kv / 2, kv, rng);
    const auto exact = strichartz_parseval_sphere(u, v).value;
    const int nt = 2 * (ku * (ku + 1) + kv * (kv + 1)) + 2;
    EXPECT_NEAR(sphere_quad(u, v, 2 * pi, nt) / exact, 1.0, 1e-8);
  }
}

TEST(SphereStrichartz, DoublingBeyondNyquistIsStable) {
  std::mt19937_64 rng(13);
  const auto u = random_field(0, 4, rng), v = random_field(0, 6, rng);
  const auto spec = SpectrumModel::sphere_exact(6);
  const auto s = bilinear_strichartz(u.resized(6), v, 2 * pi, 200, spec, build_product_grid(24));
  EXPECT_LE(s.relative_change, 1e-10);
  EXPECT_FALSE(s.under_resolved);
}

TEST(SphereStrichartz, SwapInvariance) {
  std::mt19937_64 rng(14);
  const auto u = random_field(2, 3, rng, 9), v = random_field(6, 9, rng);
  EXPECT_NEAR(strichartz_parseval_sphere(u, v).value, strichartz_parseval_sphere(v, u).value, 1e-13);
}

TEST(SphereStrichartz, GridGuard) {
  const auto spec = SpectrumModel::sphere_exact(4);
  EXPECT_THROW(bilinear_strichartz(y(4, 4, 0), y(4, 4, 0), 1.0, 10, spec, build_product_grid(8)), ResolutionError);
}

TEST(SphereProblem, NormalOperatorIsSquaredFunctional) {
  const SphereStrichartzProblem pb(4, 16);
  std::mt19937_64 rng(15);
  const auto u = pb.mask(0, pb.random_start(0, rng));
  const auto v = pb.mask(1, pb.random_start(1, rng));
  const double q = strichartz_parseval_sphere(u, v).value;
  const auto nu = pb.normal(0, v)(u);
  const auto nv = pb.normal(1, u)(v);
  EXPECT_NEAR(dot(u, nu).real(), q * q, 1e-10 * q * q);
  EXPECT_NEAR(dot(v, nv).real(), q * q, 1e-10 * q * q);
  EXPECT_GT(pb.coupled_groups(), 0u);
}

TEST(TorusStrichartz, ConstantData) {
  TorusField c(0);
  c(0, 0) = 1.0;
  const auto s = bilinear_strichartz(c, c, 1.0, 4, SpectrumModel::torus_exact(0), TorusGrid{2});
  EXPECT_NEAR(s.value, 1.0, 1e-14);
}

TEST(TorusProblem, NormalOperatorMatchesQuadrature) {
  const TorusStrichartzProblem pb(2, 4);
  std::mt19937_64 rng(16);
  const auto u = pb.mask(0, pb.random_start(0, rng));
  const auto v = pb.mask(1, pb.random_start(1, rng));
  const int a = std::max(u.half_width(), v.half_width());
  const auto q = bilinear_strichartz(u, v, 1.0, 0, SpectrumModel::torus_exact(a),
                                     build_torus_product_grid(2 * (u.half_width() + v.half_width()) + 1));
  EXPECT_LE(q.relative_change, 1e-10);
  const auto nu = pb.normal(0, v)(u);
  const auto nv = pb.normal(1, u)(v);
  EXPECT_NEAR(dot(u, nu).real() / (q.value * q.value), 1.0, 1e-9);
  EXPECT_NEAR(dot(v, nv).real() / (q.value * q.value), 1.0, 1e-9);
  EXPECT_LE(pb.coupled_pair_count(), pb.pair_count());
}

TEST(Scan, SyntheticFitAndShapes) {
  StrichartzScanOptions opt;
  const auto r = strichartz_exponent_scan({{1, 4}, {2, 8}, {3, 12}, {4, 16}}, ScanGeometry::sphere, opt, 1);
  ASSERT_EQ(r.points.size(), 4u);
  for (std::size_t i = 1; i < r.points.size(); ++i) EXPECT_GE(r.points[i].quotient, r.points[i - 1].quotient);
  EXPECT_THROW(strichartz_exponent_scan({{1, 4}, {2, 8}}, ScanGeometry::sphere, opt, 1), InvalidParams);
}
