#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "red/red.hpp"

using namespace red;

namespace {

SpecPtr line_spec(double L, int n, double dt, double m = 1.0) {
  SystemSpec s;
  s.box_length = {L};
  s.grid_points = {n};
  s.dt = dt;
  s.masses = {m};
  return make_spec(s);
}

ShiftVelocity shift1(double v) { return {{v}}; }

}  // namespace

TEST(BuildKernel, LinearDrift) {
  auto spec = line_spec(10.0, 16, 0.01);
  auto k = build_kernel({{1.0}}, DriftPotential::linear({3.0}), shift1(0.0), *spec);
  EXPECT_NEAR(k.mean_step[0], 0.03, 1e-15);
  EXPECT_NEAR(k.covariance_diag[0], 0.01, 1e-15);
}

TEST(BuildKernel, ConstantDrift) {
  auto spec = line_spec(10.0, 16, 0.01);
  EXPECT_EQ(build_kernel({{1.0}}, DriftPotential::constant(1), shift1(0.0), *spec).mean_step[0], 0.0);
}

TEST(BuildKernel, ShiftSubtracts) {
  auto spec = line_spec(10.0, 16, 0.01);
  auto k = build_kernel({{1.0}}, DriftPotential::linear({3.0}), shift1(0.5), *spec);
  EXPECT_NEAR(k.mean_step[0], 0.025, 1e-15);
}

TEST(BuildKernel, PerParticleMass) {
  SystemSpec s;
  s.n_particles = 2;
  s.masses = {1.0, 2.0};
  s.box_length = {10.0};
  s.grid_points = {8, 8};
  s.dt = 0.01;
  auto spec = make_spec(s);
  auto k = build_kernel({{1.0, 2.0}}, DriftPotential::linear({3.0, 1.0}), shift1(0.4), *spec);
  EXPECT_NEAR(k.mean_step[0], 0.03 - 0.004, 1e-15);
  EXPECT_NEAR(k.mean_step[1], 0.005 - 0.004, 1e-15);
  EXPECT_NEAR(k.covariance_diag[0], 0.01, 1e-15);
  EXPECT_NEAR(k.covariance_diag[1], 0.005, 1e-15);
}

TEST(BuildKernel, Errors) {
  SystemSpec s;
  s.box_length = {10.0};
  s.grid_points = {16};
  s.dt = 0.0;
  EXPECT_ANY_THROW({
    auto spec = make_spec(s);
    build_kernel({{1.0}}, DriftPotential::constant(1), shift1(0.0), *spec);
  });
  auto spec = line_spec(10.0, 16, 0.01);
  auto bad = DriftPotential::closed_form(
      1, [](std::span<const double>) { return 0.0; },
      [](std::span<const double>, std::span<double> g) { g[0] = std::numeric_limits<double>::infinity(); });
  EXPECT_THROW(build_kernel({{1.0}}, bad, shift1(0.0), *spec), NumericalError);
}

TEST(BuildKernel, GridDriftInterpolatesLinearField) {
  // phi = sin(2 pi x / L) on the grid: node gradients are spectral, between
  // nodes they are interpolated linearly.
  const double L = 8.0;
  auto spec = line_spec(L, 64, 0.01);
  const double w = 2.0 * std::numbers::pi / L;
  auto phi = ScalarField::from_function(spec, [&](std::span<const double> x) { return std::sin(w * x[0]); });
  auto drift = DriftPotential::on_grid(phi);
  const double h = spec->spacing(0);
  auto k = build_kernel({{3.0 * h}}, drift, shift1(0.0), *spec);
  EXPECT_NEAR(k.mean_step[0], 0.01 * w * std::cos(w * 3.0 * h), 1e-12);
  auto mid = build_kernel({{3.5 * h}}, drift, shift1(0.0), *spec);
  EXPECT_NEAR(mid.mean_step[0], 0.01 * 0.5 * w * (std::cos(w * 3.0 * h) + std::cos(w * 4.0 * h)), 1e-12);
}

TEST(SampleStep, DegenerateCovarianceReturnsMean) {
  auto spec = line_spec(10.0, 16, 0.01);
  TransitionKernel k{{{2.0}}, {0.3}, {0.0}};
  CounterRng rng(1, 2, 3);
  EXPECT_DOUBLE_EQ(sample_step(k, rng, *spec).coordinates[0], 2.3);
}

TEST(SampleStep, Deterministic) {
  auto spec = line_spec(10.0, 16, 0.01);
  auto k = build_kernel({{1.0}}, DriftPotential::linear({3.0}), shift1(0.0), *spec);
  CounterRng a(42, 7, 1), b(42, 7, 1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_step(k, a, *spec).coordinates, sample_step(k, b, *spec).coordinates);
}

TEST(SampleStep, MomentsOfHundredThousandDraws) {
  auto spec = line_spec(10.0, 16, 0.01);
  auto k = build_kernel({{5.0}}, DriftPotential::linear({3.0}), shift1(0.0), *spec);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    CounterRng rng(99, static_cast<std::uint64_t>(i), 0);
    const double d = sample_step(k, rng, *spec).coordinates[0] - 5.0;
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / n, var = (sum2 - n * mean * mean) / (n - 1);
  EXPECT_NEAR(mean, 0.03, 5.0 * 0.1 / std::sqrt(n));
  EXPECT_NEAR(var, 0.01, 0.03 * 0.01);
}

TEST(EvolveEnsemble, ZeroStepsIsIdentity) {
  auto spec = line_spec(10.0, 16, 0.01);
  auto e = sample_gaussian(spec, {{5.0}}, std::vector<double>{1.0}, 100, 3);
  auto out = evolve_ensemble(e, DriftPotential::linear({3.0}), shift1(0.2), 0);
  EXPECT_EQ(out.positions, e.positions);
  EXPECT_EQ(out.time, e.time);
}

TEST(EvolveEnsemble, OneFreeStepMoments) {
  SystemSpec s;
  s.n_particles = 2;
  s.masses = {1.0, 4.0};
  s.box_length = {10.0};
  s.grid_points = {8, 8};
  s.dt = 0.01;
  auto spec = make_spec(s);
  auto e = Ensemble::at_point(spec, {{5.0, 5.0}}, 100000, 17);
  auto m = empirical_moments(e, evolve_ensemble(e, DriftPotential::constant(2), shift1(0.0), 1));
  for (std::size_t A = 0; A < 2; ++A) {
    const double expected_var = 0.01 / s.masses[A];
    EXPECT_NEAR(m.mean[A], 0.0, 5.0 * std::sqrt(expected_var / 1e5));
    // sampling sd of a variance estimate is var * sqrt(2/K)
    EXPECT_NEAR(m.variance[A], expected_var, 5.0 * expected_var * std::sqrt(2.0 / 1e5));
  }
  EXPECT_NEAR(m.cov(0, 1), 0.0, 5.0 * std::sqrt(0.01 * 0.0025 / 1e5));
}

TEST(EvolveEnsemble, FreeDiffusionMatchesHeatKernel) {
  const double L = 20.0, x0 = 10.0;
  auto spec = line_spec(L, 64, 0.01);
  const std::size_t K = 100000;
  auto e = Ensemble::at_point(spec, {{x0}}, K, 2024);
  auto out = evolve_ensemble(e, DriftPotential::constant(1), shift1(0.0), 100);
  EXPECT_NEAR(out.time, 1.0, 1e-12);
  const double width = std::sqrt(spec->hbar * out.time / spec->masses[0]);
  const int bins = 40;
  std::vector<double> hist(bins, 0.0);
  for (std::size_t k = 0; k < K; ++k) hist[static_cast<std::size_t>(out.positions[k] / L * bins)] += 1.0 / K;
  double l1 = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double lo = b * L / bins - x0, hi = (b + 1) * L / bins - x0;
    const double mass = 0.5 * (std::erf(hi / (width * std::sqrt(2.0))) - std::erf(lo / (width * std::sqrt(2.0))));
    l1 += std::abs(hist[static_cast<std::size_t>(b)] - mass);
  }
  EXPECT_LT(l1, 0.05);
}

TEST(EvolveEnsemble, ShiftIsRigidTranslationPathByPath) {
  auto spec = line_spec(10.0, 16, 0.01);
  auto e = sample_gaussian(spec, {{5.0}}, std::vector<double>{0.5}, 500, 8);
  const double xi = 0.7;
  const int steps = 20;
  auto drift = DriftPotential::linear({1.5});
  auto shifted = evolve_ensemble(e, drift, shift1(xi), steps);
  auto plain = evolve_ensemble(e, drift, shift1(0.0), steps);
  for (std::size_t k = 0; k < e.size(); ++k)
    EXPECT_NEAR(minimal_image(shifted.positions[k] - (plain.positions[k] - xi * steps * spec->dt), 10.0), 0.0, 1e-12);
}

TEST(EvolveEnsemble, FluctuationsAreShiftIndependent) {
  auto spec = line_spec(10.0, 16, 0.01);
  auto e = Ensemble::at_point(spec, {{5.0}}, 50000, 5);
  auto a = empirical_moments(e, evolve_ensemble(e, DriftPotential::constant(1), shift1(0.0), 1));
  auto b = empirical_moments(e, evolve_ensemble(e, DriftPotential::constant(1), shift1(3.0), 1));
  EXPECT_NEAR(a.variance[0], b.variance[0], 1e-12);  // same streams: identical noise
  EXPECT_NEAR(b.mean[0] - a.mean[0], -0.03, 1e-12);
}

TEST(EvolveEnsemble, IndependentOfThreadCount) {
  auto spec = line_spec(10.0, 16, 0.01);
  auto e = sample_gaussian(spec, {{5.0}}, std::vector<double>{1.0}, 5000, 12);
  setenv("RED_THREADS", "1", 1);
  auto one = evolve_ensemble(e, DriftPotential::linear({0.3}), shift1(0.1), 5);
  setenv("RED_THREADS", "4", 1);
  auto four = evolve_ensemble(e, DriftPotential::linear({0.3}), shift1(0.1), 5);
  unsetenv("RED_THREADS");
  EXPECT_EQ(one.positions, four.positions);
}

TEST(EvolveEnsemble, SplittingStepsIsMarkov) {
  auto spec = line_spec(10.0, 16, 0.01);
  auto e = sample_gaussian(spec, {{5.0}}, std::vector<double>{1.0}, 200, 4);
  auto drift = DriftPotential::linear({0.3});
  auto whole = evolve_ensemble(e, drift, shift1(0.1), 6);
  auto split = evolve_ensemble(evolve_ensemble(e, drift, shift1(0.1), 2), drift, shift1(0.1), 4);
  EXPECT_EQ(whole.positions, split.positions);
  EXPECT_EQ(whole.step, 6u);
}

TEST(EmpiricalMoments, Examples) {
  auto spec = line_spec(10.0, 16, 0.01);
  auto e = sample_gaussian(spec, {{5.0}}, std::vector<double>{1.0}, 100, 1);
  auto same = empirical_moments(e, e);
  EXPECT_EQ(same.mean[0], 0.0);
  EXPECT_EQ(same.variance[0], 0.0);
  auto moved = e;
  for (double& x : moved.positions) x = wrap_coordinate(x + 0.2, 10.0);
  auto m = empirical_moments(e, moved);
  EXPECT_NEAR(m.mean[0], 0.2, 1e-12);
  EXPECT_NEAR(m.variance[0], 0.0, 1e-24);
  auto fewer = e;
  fewer.positions.pop_back();
  EXPECT_THROW(empirical_moments(e, fewer), ShapeError);
}
