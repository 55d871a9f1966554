#include <gtest/gtest.h>

#include <random>

#include "bispec/bourgain.hpp"

using namespace bispec;

namespace {

TimeSampledField<HarmonicField> free_mode(int k_max, int k, const SpectrumModel& spec, std::size_t n_t, double t_win) {
  std::vector<HarmonicField> fs;
  for (std::size_t j = 0; j < n_t; ++j) {
    HarmonicField f(k_max);
    f(k, 0) = std::polar(1.0, -t_win * double(j) / double(n_t) * spec.eigenvalue(k, 0));
    fs.push_back(std::move(f));
  }
  return apply_time_window(sample_uniform(std::move(fs), t_win));
}

/// int_0^T psi(t)^p dt by composite Simpson on a fine grid.
double window_moment(double t_win, int p) {
  const int n = 200000;
  const double h = t_win / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::pow(time_window(i * h, t_win), p);
  }
  return s * h / 3.0;
}

}  // namespace

TEST(TimeWindow, Shape) {
  EXPECT_EQ(time_window(0.0, 2.0), 0.0);
  EXPECT_EQ(time_window(2.0, 2.0), 0.0);
  EXPECT_EQ(time_window(1.0, 2.0), 1.0);
  EXPECT_EQ(time_window(0.5, 2.0), 1.0);
  EXPECT_GT(time_window(0.2, 2.0), 0.0);
  EXPECT_LT(time_window(0.2, 2.0), 1.0);
}

TEST(Xsb, ZeroZeroIsSpaceTimeL2) {
  std::mt19937_64 rng(3);
  const auto spec = SpectrumModel::sphere_exact(6);
  TrajectorySuiteOptions o;
  o.k_max = 6;
  const auto tr = random_trajectory(spec, o, rng);
  EXPECT_NEAR(xsb_norm(tr, 0.0, 0.0, spec).value / l2t_l2x_norm(tr), 1.0, 1e-12);
}

TEST(Xsb, FreeModeIndependentOfDegree) {
  const int K = 8;
  const auto spec = SpectrumModel::sphere_exact(K);
  const double ref = xsb_norm(free_mode(K, 0, spec, 256, 2.0), 0.0, 0.6, spec).value;
  for (int k : {1, 3, 8}) EXPECT_NEAR(xsb_norm(free_mode(K, k, spec, 256, 2.0), 0.0, 0.6, spec).value / ref, 1.0, 1e-6);
}

TEST(Xsb, HomogeneousAndNyquistFlag) {
  std::mt19937_64 rng(4);
  const auto spec = SpectrumModel::sphere_exact(4);
  TrajectorySuiteOptions o;
  o.k_max = 4;
  auto tr = random_trajectory(spec, o, rng);
  const auto a = xsb_norm(tr, 1.0, 0.4, spec);
  EXPECT_TRUE(a.nyquist_ok);
  for (auto& f : tr.fields) f *= 2.0;
  EXPECT_NEAR(xsb_norm(tr, 1.0, 0.4, spec).value, 2.0 * a.value, 1e-12 * a.value);
}

TEST(Xsb, RequiresWindow) {
  TimeSampledField<HarmonicField> tr;
  tr.dt = 0.1;
  tr.fields.assign(8, HarmonicField(2));
  EXPECT_THROW(xsb_norm(tr, 0.0, 0.5, SpectrumModel::sphere_exact(2)), InvalidParams);
}

TEST(MixedNorms, ZeroAndConstantInTime) {
  std::vector<HarmonicField> zeros(64, HarmonicField(3));
  EXPECT_EQ(l4t_l2x_norm(apply_time_window(sample_uniform(zeros, 2.0))), 0.0);
  std::mt19937_64 rng(5);
  const auto f = random_field(0, 3, rng);
  const auto tr = apply_time_window(sample_uniform(std::vector<HarmonicField>(256, f), 2.0));
  EXPECT_NEAR(l4t_l2x_norm(tr), std::pow(window_moment(2.0, 4), 0.25), 1e-8);
  EXPECT_NEAR(linf_t_l2x_norm(tr), 1.0, 1e-12);
}

TEST(Equivalence, IdentitiesAndBound) {
  std::mt19937_64 rng(6);
  const auto zoll = make_zoll_spectrum(2, 1.0, 8, 11);
  const auto rounded = round_spectrum(zoll);
  TrajectorySuiteOptions o;
  const auto tr = random_trajectory(zoll, o, rng);
  EXPECT_NEAR(norm_equivalence_ratio(tr, zoll, zoll, 1.0, 0.6), 1.0, 1e-15);
  EXPECT_NEAR(norm_equivalence_ratio(tr, zoll, rounded, 0.0, 0.0), 1.0, 1e-10);
  const double r = norm_equivalence_ratio(tr, zoll, rounded, 0.0, 0.6);
  const double bound = equivalence_bound(zoll, rounded, tr.fields.front().size(), 0.0, 0.6);
  EXPECT_LE(r, bound);
  EXPECT_GE(r, 1.0 / bound);
}

TEST(Equivalence, ShiftBoundIsSupremum) {
  for (double d : {0.0, 0.5, 1.0, 3.0}) {
    double best = 0.0;
    for (double x = -50; x <= 50; x += 1e-3) best = std::max(best, japanese(x + d) / japanese(x));
    EXPECT_NEAR(japanese_shift_bound(d), best, 1e-6);
  }
}

TEST(Suite, SmallRun) {
  XsbSuiteOptions o;
  o.trials = 4;
  o.trajectory.k_max = 4;
  o.trajectory.n_t = 128;
  const auto rep = run_xsb_suite(o, 1);
  EXPECT_EQ(rep.rows.size(), 4u);
  EXPECT_LE(rep.max_l2_rel_diff, 1e-8);
  EXPECT_LE(rep.free_mode_spread, 1e-6);
  EXPECT_LE(rep.max_equiv_excess, 1.0);
  EXPECT_LE(rep.max_equiv_00_dev, 1e-10);
}
