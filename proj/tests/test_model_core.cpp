#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "red/red.hpp"

using namespace red;

namespace {

SpecPtr line_spec(double L, int n) {
  SystemSpec s;
  s.box_length = {L};
  s.grid_points = {n};
  return make_spec(s);
}

SpecPtr plane_spec(double Lx, double Ly, int nx, int ny) {
  SystemSpec s;
  s.spatial_dim = 2;
  s.box_length = {Lx, Ly};
  s.grid_points = {nx, ny};
  return make_spec(s);
}

ScalarField random_field(const SpecPtr& spec, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f(spec);
  for (double& v : f.values()) v = u(gen);
  return f;
}

}  // namespace

TEST(Quadrature, ZeroField) { EXPECT_EQ(quadrature(ScalarField(line_spec(3.0, 17))), 0.0); }

TEST(Quadrature, ConstantTimesVolume) {
  auto spec = plane_spec(2.0, 4.0, 16, 32);
  EXPECT_DOUBLE_EQ(quadrature(ScalarField(spec, 1.0)), 8.0);
}

TEST(Quadrature, SelfNormalizedGaussian) {
  auto spec = line_spec(20.0, 256);
  auto g = ScalarField::from_function(spec, [](std::span<const double> x) { return std::exp(-(x[0] - 10.0) * (x[0] - 10.0) / 2.0); });
  EXPECT_NEAR(quadrature(normalized(g)), 1.0, 1e-10);
}

TEST(Quadrature, ShapeMismatchNamesBothShapes) {
  auto spec = plane_spec(1.0, 1.0, 8, 4);
  std::vector<double> wrong(10, 0.0);
  try {
    quadrature(*spec, wrong);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("8x4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("10"), std::string::npos) << msg;
  }
  EXPECT_THROW(ScalarField(spec, std::vector<double>(5)), ShapeError);
}

TEST(Quadrature, IsLinear) {
  std::mt19937_64 gen(7);
  auto spec = plane_spec(3.0, 5.0, 12, 20);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = random_field(spec, gen), g = random_field(spec, gen);
    const double a = std::uniform_real_distribution<double>(-3, 3)(gen);
    const double b = std::uniform_real_distribution<double>(-3, 3)(gen);
    const double lhs = quadrature(a * f + b * g);
    const double rhs = a * quadrature(f) + b * quadrature(g);
    EXPECT_NEAR(lhs, rhs, 1e-13 * (1.0 + std::abs(lhs)));
  }
}

TEST(Gradient, ConstantFieldHasZeroGradient) {
  auto spec = plane_spec(2.0, 3.0, 16, 8);
  for (const auto& g : gradient(ScalarField(spec, 4.2)))
    for (double v : g.values()) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(Gradient, SineMode) {
  const double L = 7.0;
  auto spec = line_spec(L, 64);
  const double w = 2.0 * std::numbers::pi / L;
  auto f = ScalarField::from_function(spec, [&](std::span<const double> x) { return std::sin(w * x[0]); });
  auto g = gradient(f);
  GridIndexer grid(*spec);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(g[0][i], w * std::cos(w * i * spec->spacing(0)), 1e-10);
}

TEST(Gradient, NoDependenceGivesZero) {
  const double L = 5.0;
  auto spec = plane_spec(L, L, 32, 32);
  auto f = ScalarField::from_function(spec, [&](std::span<const double> x) { return std::sin(2.0 * std::numbers::pi * x[0] / L); });
  auto g = gradient(f);
  for (double v : g[1].values()) EXPECT_NEAR(v, 0.0, 1e-13);
}

TEST(Gradient, RejectsNonFinite) {
  ScalarField f(line_spec(1.0, 8));
  f[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(gradient(f), NumericalError);
}

TEST(Gradient, CommutesWithWholeCellShift) {
  std::mt19937_64 gen(11);
  auto spec = plane_spec(2.0, 3.0, 16, 12);
  for (int trial = 0; trial < 5; ++trial) {
    auto f = random_field(spec, gen);
    const std::vector<int> offset{trial + 1, 3 * trial - 2};
    auto lhs = gradient(circular_shift(f, offset));
    auto g = gradient(f);
    for (int A = 0; A < 2; ++A) {
      auto rhs = circular_shift(g[static_cast<std::size_t>(A)], offset);
      for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(lhs[static_cast<std::size_t>(A)][i], rhs[i], 1e-11);
    }
  }
}

TEST(Wrap, Examples) {
  const double L = 4.0;
  auto spec = line_spec(L, 8);
  EXPECT_DOUBLE_EQ(wrap({{L + 0.5}}, *spec).coordinates[0], 0.5);
  EXPECT_DOUBLE_EQ(wrap({{0.3}}, *spec).coordinates[0], 0.3);
  EXPECT_DOUBLE_EQ(wrap({{-0.25 * L}}, *spec).coordinates[0], 0.75 * L);
}

TEST(Wrap, IdempotentAndInRange) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  auto spec = plane_spec(1.7, 0.3, 4, 4);
  for (int trial = 0; trial < 1000; ++trial) {
    ConfigPoint x{{u(gen), u(gen)}};
    auto once = wrap(x, *spec), twice = wrap(once, *spec);
    EXPECT_EQ(once.coordinates, twice.coordinates);
    EXPECT_GE(once.coordinates[0], 0.0);
    EXPECT_LT(once.coordinates[0], 1.7);
    EXPECT_LT(once.coordinates[1], 0.3);
  }
  // A tiny negative value must not round up to L.
  EXPECT_LT(wrap({{-1e-18, -1e-18}}, *spec).coordinates[0], 1.7);
}

TEST(SystemSpec, ValidatesInvariants) {
  SystemSpec s;
  s.masses = {-1.0};
  EXPECT_THROW(make_spec(s), DomainError);
  s = {};
  s.spatial_dim = 4;
  EXPECT_THROW(make_spec(s), DomainError);
  s = {};
  s.grid_points = {1 << 12};
  s.grid_budget = 1 << 10;
  EXPECT_THROW(make_spec(s), DomainError);
  s = {};
  s.n_particles = 2;
  s.masses = {1.0, 2.0};
  s.grid_points = {8, 8};
  auto spec = make_spec(s);
  EXPECT_DOUBLE_EQ(spec->total_mass(), 3.0);
  EXPECT_DOUBLE_EQ(spec->mass_of_axis(1), 2.0);
}

TEST(EpistemicState, RejectsUnnormalizedDensity) {
  auto spec = line_spec(2.0, 16);
  EXPECT_THROW(EpistemicState::make(ScalarField(spec, 1.0), ScalarField(spec)), DomainError);
  EXPECT_NO_THROW(EpistemicState::make(ScalarField(spec, 0.5), ScalarField(spec)));
}
