#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "red/red.hpp"

using namespace red;

namespace {

constexpr double kPi = std::numbers::pi;

SpecPtr make(int n_particles, int spatial_dim, std::vector<double> masses, double L, int n, double dt = 0.01,
             double hbar = 1.0) {
  SystemSpec s;
  s.n_particles = n_particles;
  s.spatial_dim = spatial_dim;
  s.masses = std::move(masses);
  s.box_length = std::vector<double>(static_cast<std::size_t>(spatial_dim), L);
  s.grid_points = std::vector<int>(static_cast<std::size_t>(n_particles * spatial_dim), n);
  s.dt = dt;
  s.hbar = hbar;
  return make_spec(s);
}

// rho proportional to exp(kappa sum_A cos(2 pi (x_A - c_A) / L)); log rho is band-limited.
ScalarField von_mises(const SpecPtr& spec, double kappa, std::vector<double> center) {
  auto rho = ScalarField::from_function(spec, [&](std::span<const double> x) {
    double e = 0.0;
    for (int A = 0; A < spec->config_dim(); ++A)
      e += std::cos(2.0 * kPi * (x[static_cast<std::size_t>(A)] - center[static_cast<std::size_t>(A)]) /
                    spec->length_of_axis(A));
    return std::exp(kappa * e);
  });
  return normalized(std::move(rho));
}

// phi = sum_A a_A sin(2 pi x_A / L + b_A)
ScalarField wavy(const SpecPtr& spec, double amplitude) {
  return ScalarField::from_function(spec, [&](std::span<const double> x) {
    double v = 0.0;
    for (int A = 0; A < spec->config_dim(); ++A)
      v += amplitude * (1.0 + 0.3 * A) * std::sin(2.0 * kPi * x[static_cast<std::size_t>(A)] / spec->length_of_axis(A) + 0.7 * A);
    return v;
  });
}

// State consistent with the grid drift phi + tilt . x.
EpistemicState state_from_drift(const ScalarField& rho, const ScalarField& phi, const std::vector<double>& tilt) {
  std::vector<double> phase_tilt = tilt;
  for (double& t : phase_tilt) t *= rho.spec().hbar;
  return EpistemicState::make(rho, phase_from_drift(phi, rho), phase_tilt);
}

}  // namespace

TEST(EnsembleHamiltonian, UniformConstantIsZero) {
  auto spec = make(1, 1, {1.0}, 5.0, 32);
  auto state = EpistemicState::make(ScalarField(spec, 0.2), ScalarField(spec, 1.0));
  EXPECT_NEAR(ensemble_hamiltonian_h0(state, {{0.0}}), 0.0, 1e-15);
}

TEST(EnsembleHamiltonian, PlaneWaveKinetic) {
  auto spec = make(1, 1, {2.5}, 5.0, 32);
  const double p = 1.7;
  auto state = EpistemicState::make(ScalarField(spec, 0.2), ScalarField(spec), {p});
  EXPECT_NEAR(ensemble_hamiltonian_h0(state, {{0.0}}), p * p / (2.0 * 2.5), 1e-13);
}

TEST(EnsembleHamiltonian, GaussianQuantumTerm) {
  auto spec = make(1, 1, {1.0}, 24.0, 256);
  const double sigma = 1.3;
  auto rho = presets::gaussian_density(spec, std::vector<double>{12.0}, std::vector<double>{sigma});
  auto terms = ensemble_hamiltonian_terms(EpistemicState::make(rho, ScalarField(spec)), {{0.0}});
  EXPECT_NEAR(terms.kinetic, 0.0, 1e-15);
  EXPECT_NEAR(terms.quantum, 1.0 / (8.0 * sigma * sigma), 1e-10);
}

TEST(InfoMetricG, ConstantTerm) {
  auto spec = make(2, 3, {1.0, 1.0}, 4.0, 4, 0.01);
  auto state = EpistemicState::make(ScalarField(spec, 1.0 / spec->volume()), ScalarField(spec));
  auto r = info_metric_g(state, ShiftVelocity::zero(*spec));
  EXPECT_DOUBLE_EQ(r.constant_term, 150.0);
  EXPECT_NEAR(r.g_total, r.constant_term + r.entropy_term + r.h0_term, 1e-12);
}

TEST(InfoMetricG, OnlyH0DependsOnShift) {
  auto spec = make(2, 1, {1.0, 2.0}, 10.0, 32);
  auto rho = von_mises(spec, 1.5, {4.0, 6.0});
  auto state = EpistemicState::make(rho, wavy(spec, 0.4), {0.2, -0.3});
  auto a = info_metric_g(state, {{0.0}});
  auto b = info_metric_g(state, {{0.9}});
  EXPECT_EQ(a.constant_term, b.constant_term);
  EXPECT_EQ(a.entropy_term, b.entropy_term);
  EXPECT_NE(a.h0_term, b.h0_term);
  EXPECT_NEAR(b.g_total, b.constant_term + b.entropy_term + b.h0_term, 1e-12);
}

TEST(InfoMetricG, BestShiftMinimizesOverTrialShifts) {
  auto spec = make(2, 1, {1.0, 2.0}, 10.0, 32);
  auto state = EpistemicState::make(von_mises(spec, 1.5, {4.0, 6.0}), wavy(spec, 0.4), {0.2, -0.3});
  auto best = best_match_shift(state, BestMatchMode::closed_form);
  const double g_best = info_metric_g(state, best).g_total;
  for (int j = 0; j < 100; ++j) {
    const double xi = -2.0 + 4.0 * j / 99.0;
    EXPECT_LE(g_best, info_metric_g(state, {{xi}}).g_total);
  }
}

TEST(InfoMetricG, DriftRouteAgrees) {
  auto spec = make(1, 2, {1.3}, 8.0, 32, 0.05);
  auto rho = von_mises(spec, 1.2, {3.0, 5.0});
  auto phi = wavy(spec, 0.5);
  const std::vector<double> tilt{2.0 * kPi / 8.0, 0.0};
  auto state = state_from_drift(rho, phi, tilt);
  auto grad = gradient(phi);
  for (std::size_t A = 0; A < 2; ++A)
    for (double& v : grad[A].values()) v += tilt[A];
  const ShiftVelocity xi{{0.3, -0.2}};
  auto a = info_metric_g(state, xi), b = info_metric_g_drift(rho, grad, xi);
  EXPECT_NEAR(a.g_total, b.g_total, 1e-10);
  EXPECT_NEAR(a.entropy_term, b.entropy_term, 1e-10);
  EXPECT_NEAR(a.h0_term, b.h0_term, 1e-10);
}

// Phase curved where the density sits (Phi = -beta cos about the density
// centre), so the entropy term is large compared with the sampling error.
struct OracleSetup {
  SpecPtr spec = make(2, 1, {1.0, 1.5}, 10.0, 48, 0.5);
  ScalarField rho = von_mises(spec, 2.0, {3.0, 6.5});
  ScalarField phase = ScalarField::from_function(spec, [](std::span<const double> x) {
    return -1.5 * (std::cos(2.0 * kPi * (x[0] - 3.0) / 10.0) + std::cos(2.0 * kPi * (x[1] - 6.5) / 10.0));
  });
  std::vector<double> tilt{2.0 * kPi / 10.0, -2.0 * kPi / 10.0};
  EpistemicState state = EpistemicState::make(rho, phase, tilt);
  DriftPotential drift = DriftPotential::on_grid(drift_from_phase(phase, rho), tilt);
};

class MonteCarloOracle : public ::testing::Test, protected OracleSetup {};

TEST_F(MonteCarloOracle, AgreesWithClosedForm) {
  const ShiftVelocity xi{{0.25}};
  auto closed = info_metric_g(state, xi);
  auto mc = info_metric_g_mc(state, drift, xi, 100000, 1);
  EXPECT_LT(std::abs(mc.mean - closed.g_total), 3.0 * mc.standard_error)
      << "mc " << mc.mean << " +- " << mc.standard_error << " closed " << closed.g_total << " entropy term " << closed.entropy_term;
  // the entropy term is a visible part of the total here, so its sign is tested
  EXPECT_GT(std::abs(closed.entropy_term), 10.0 * mc.standard_error);
}

TEST_F(MonteCarloOracle, ReseedingIsConsistent) {
  auto a = info_metric_g_mc(state, drift, {{0.0}}, 100000, 11);
  auto b = info_metric_g_mc(state, drift, {{0.0}}, 100000, 12);
  EXPECT_NE(a.mean, b.mean);
  EXPECT_LT(std::abs(a.mean - b.mean), 3.0 * std::hypot(a.standard_error, b.standard_error));
}

TEST_F(MonteCarloOracle, DoublingSamplesShrinksError) {
  auto a = info_metric_g_mc(state, drift, {{0.0}}, 50000, 3);
  auto b = info_metric_g_mc(state, drift, {{0.0}}, 100000, 3);
  EXPECT_NEAR(a.standard_error / b.standard_error, std::sqrt(2.0), 0.1);
}

TEST_F(MonteCarloOracle, Reproducible) {
  auto a = info_metric_g_mc(state, drift, {{0.1}}, 5000, 9);
  auto b = info_metric_g_mc(state, drift, {{0.1}}, 5000, 9);
  EXPECT_EQ(a.mean, b.mean);
}

TEST_F(MonteCarloOracle, RejectsInconsistentTriple) {
  auto wrong = state;
  for (double& v : wrong.phase.values()) v *= 1.1;
  EXPECT_THROW(info_metric_g_mc(wrong, drift, {{0.0}}, 1000, 1), DomainError);
  EXPECT_THROW(info_metric_g_mc(state, drift, {{0.0}}, 999, 1), DomainError);
}

TEST(TotalMomentum, Examples) {
  auto spec = make(2, 1, {1.0, 1.0}, 6.0, 32);
  auto rho = von_mises(spec, 0.8, {1.0, 2.0});
  auto zero = total_momentum(EpistemicState::make(rho, ScalarField(spec, 2.0)));
  EXPECT_NEAR(zero[0], 0.0, 1e-14);
  auto p = total_momentum(EpistemicState::make(rho, ScalarField(spec), {0.7, 0.7}));
  EXPECT_NEAR(p[0], 1.4, 1e-13);
}

TEST(TotalMomentum, OddPhaseEvenDensity) {
  const double L = 10.0;
  auto spec = make(1, 1, {1.0}, L, 64);
  auto rho = von_mises(spec, 2.0, {0.0});  // even about x = 0
  auto phase = ScalarField::from_function(spec, [&](std::span<const double> x) { return std::sin(2.0 * kPi * x[0] / L); });
  // sin is odd about 0, but d Phi is even; use an odd gradient instead: Phi = cos, dPhi = -sin
  auto odd_grad_phase = ScalarField::from_function(spec, [&](std::span<const double> x) { return std::cos(2.0 * kPi * x[0] / L); });
  (void)phase;
  EXPECT_NEAR(total_momentum(EpistemicState::make(rho, odd_grad_phase))[0], 0.0, 1e-14);
}

TEST(BestMatch, Examples) {
  auto spec = make(2, 1, {1.0, 1.0}, 6.0, 32);
  auto rho = von_mises(spec, 0.8, {1.0, 2.0});
  EXPECT_NEAR(best_match_shift(EpistemicState::make(rho, ScalarField(spec, 1.0)), BestMatchMode::closed_form).components[0],
              0.0, 1e-14);
  auto state = EpistemicState::make(rho, ScalarField(spec), {0.7, 0.7});
  EXPECT_NEAR(best_match_shift(state, BestMatchMode::closed_form).components[0], 0.7, 1e-13);
  EXPECT_NEAR(best_match_shift(state, BestMatchMode::numerical).components[0], 0.7, 1e-10);
}

TEST(BestMatch, ModesAgreeAndNewtonTakesOneStep) {
  auto spec = make(3, 2, {1.0, 2.0, 0.5}, 6.0, 8);
  auto state = EpistemicState::make(von_mises(spec, 0.6, {1, 2, 3, 4, 5, 0.5}), wavy(spec, 0.3),
                                    {0.1, 0.2, -0.3, 0.0, 0.4, -0.1});
  auto closed = best_match(state, BestMatchMode::closed_form);
  auto numeric = best_match(state, BestMatchMode::numerical);
  BestMatchOptions newton;
  newton.use_hessian = true;
  auto one = best_match(state, BestMatchMode::numerical, newton);
  EXPECT_LE(one.iterations, 1);
  for (std::size_t a = 0; a < 2; ++a) {
    const double ref = closed.shift.components[a];
    EXPECT_NEAR(numeric.shift.components[a], ref, 1e-8 * std::max(1.0, std::abs(ref)));
    EXPECT_NEAR(one.shift.components[a], ref, 1e-12);
  }
  EXPECT_LT(numeric.gradient_norm, 1e-10);
}

TEST(BestMatch, IterationCapRaises) {
  auto spec = make(1, 1, {1.0}, 6.0, 16);
  auto state = EpistemicState::make(ScalarField(spec, 1.0 / 6.0), ScalarField(spec), {2.0 * kPi / 6.0});
  BestMatchOptions opts;
  opts.max_iterations = 0;
  EXPECT_THROW(best_match(state, BestMatchMode::numerical, opts), NumericalError);
}

TEST(BestMatch, StationarityByFiniteDifferences) {
  auto spec = make(2, 1, {1.0, 3.0}, 8.0, 32);
  auto state = EpistemicState::make(von_mises(spec, 1.0, {2.0, 5.0}), wavy(spec, 0.5), {0.3, 0.9});
  auto xi = best_match_shift(state, BestMatchMode::closed_form);
  const double h = 1e-5;
  const double gp = info_metric_g(state, {{xi.components[0] + h}}).g_total;
  const double gm = info_metric_g(state, {{xi.components[0] - h}}).g_total;
  EXPECT_NEAR((gp - gm) / (2.0 * h), 0.0, 1e-8);
}

TEST(BestMatch, BoostCovarianceAndInvariantMinimum) {
  auto spec = make(2, 2, {1.0, 2.0}, 8.0, 16);
  auto rho = von_mises(spec, 1.0, {2.0, 5.0, 4.0, 3.0});
  auto phase = wavy(spec, 0.5);
  auto state = EpistemicState::make(rho, phase, {0.1, 0.2, 0.3, 0.4});
  const std::vector<double> c{0.25, -0.4};
  std::vector<double> boosted_tilt{0.1 + 1.0 * c[0], 0.2 + 1.0 * c[1], 0.3 + 2.0 * c[0], 0.4 + 2.0 * c[1]};
  auto boosted = EpistemicState::make(rho, phase, boosted_tilt);
  auto a = best_match_shift(state, BestMatchMode::closed_form);
  auto b = best_match_shift(boosted, BestMatchMode::closed_form);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(b.components[i] - a.components[i], c[i], 1e-13);
  EXPECT_NEAR(info_metric_g(state, a).g_total, info_metric_g(boosted, b).g_total, 1e-10);
}

TEST(BestMatch, TranslationInvariance) {
  auto spec = make(2, 1, {1.0, 2.0}, 8.0, 32);
  auto state = EpistemicState::make(von_mises(spec, 1.0, {2.0, 5.0}), wavy(spec, 0.5), {0.3, 0.9});
  const std::vector<int> offset{5, 5};
  auto moved = EpistemicState::make(circular_shift(state.rho, offset), circular_shift(state.phase, offset), state.phase_tilt);
  auto a = best_match_shift(state, BestMatchMode::closed_form);
  auto b = best_match_shift(moved, BestMatchMode::closed_form);
  EXPECT_NEAR(std::abs(a.components[0]), std::abs(b.components[0]), 1e-12);
  EXPECT_NEAR(info_metric_g(state, a).g_total, info_metric_g(moved, b).g_total, 1e-12);
}
