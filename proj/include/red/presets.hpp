#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "red/quantum.hpp"
#include "red/state.hpp"

// Initial states and potentials used by experiments and tests.

namespace red::presets {

namespace detail {

// Periodized Gaussian amplitude exp(-(x - c)^2 / 4 sigma^2) summed over
// enough images that it is smooth and periodic to machine precision.
inline double periodic_gaussian_amplitude(double x, double center, double sigma, double length) {
  const double d = minimal_image(x - center, length);
  const int images = static_cast<int>(std::ceil(10.0 * sigma / length)) + 1;
  double s = 0.0;
  for (int j = -images; j <= images; ++j) {
    const double y = d - j * length;
    s += std::exp(-y * y / (4.0 * sigma * sigma));
  }
  return s;
}

}  // namespace detail

/// Periodized Gaussian density with per-axis standard deviation sigma.
inline ScalarField gaussian_density(const SpecPtr& spec, std::span<const double> center, std::span<const double> sigma) {
  auto rho = ScalarField::from_function(spec, [&](std::span<const double> x) {
    double amp = 1.0;
    for (int A = 0; A < spec->config_dim(); ++A) {
      const auto a = static_cast<std::size_t>(A);
      amp *= detail::periodic_gaussian_amplitude(x[a], center[a], sigma[a], spec->length_of_axis(A));
    }
    return amp * amp;
  });
  return normalized(std::move(rho));
}

/// Gaussian density with phase Phi = momentum . x carried as a tilt.
inline EpistemicState gaussian_state(const SpecPtr& spec, std::span<const double> center, std::span<const double> sigma,
                                     std::span<const double> momentum) {
  return EpistemicState::make(gaussian_density(spec, center, sigma), ScalarField(spec), {momentum.begin(), momentum.end()});
}

/// Gaussian packet with mean momentum `momentum` (must be commensurate with the box).
inline WaveField gaussian_packet(const SpecPtr& spec, std::span<const double> center, std::span<const double> sigma,
                                 std::span<const double> momentum) {
  return to_wavefunction(gaussian_state(spec, center, sigma, momentum));
}

/// exp(i k . x) / sqrt(V).
inline WaveField plane_wave(const SpecPtr& spec, std::span<const double> k) {
  std::vector<double> tilt(k.begin(), k.end());
  for (double& t : tilt) t *= spec->hbar;
  auto uniform = ScalarField(spec, 1.0 / spec->volume());
  return to_wavefunction(EpistemicState::make(std::move(uniform), ScalarField(spec), std::move(tilt)));
}

/// Normalized superposition weight_a psi_a + weight_b psi_b of two Gaussian packets.
inline WaveField two_packet(const SpecPtr& spec, std::span<const double> center_a, std::span<const double> momentum_a,
                            std::span<const double> center_b, std::span<const double> momentum_b,
                            std::span<const double> sigma, double weight_a = 1.0, double weight_b = 1.0) {
  auto a = gaussian_packet(spec, center_a, sigma, momentum_a);
  auto b = gaussian_packet(spec, center_b, sigma, momentum_b);
  for (std::size_t i = 0; i < a.size(); ++i) a.values[i] = weight_a * a.values[i] + weight_b * b.values[i];
  return normalized(std::move(a));
}

/// U = k/2 sum_a (x_{particle}^a - c^a)^2, measured from `center` with the
/// minimal-image convention (discontinuous at the far side of the box).
inline Potential external_harmonic(const SpecPtr& spec, double k, std::span<const double> center, int particle = 0) {
  auto u = ScalarField::from_function(spec, [&](std::span<const double> x) {
    double e = 0.0;
    for (int a = 0; a < spec->spatial_dim; ++a) {
      const int A = particle * spec->spatial_dim + a;
      const double d = minimal_image(x[static_cast<std::size_t>(A)] - center[static_cast<std::size_t>(a)],
                                     spec->length_of_axis(A));
      e += 0.5 * k * d * d;
    }
    return e;
  });
  return {std::move(u), false};
}

/// U = k/2 sum_{i<j} d(x_i, x_j)^2 with minimal-image separations.
inline Potential relational_harmonic(const SpecPtr& spec, double k) {
  auto u = ScalarField::from_function(spec, [&](std::span<const double> x) {
    double e = 0.0;
    for (int i = 0; i < spec->n_particles; ++i)
      for (int j = i + 1; j < spec->n_particles; ++j)
        for (int a = 0; a < spec->spatial_dim; ++a) {
          const auto ai = static_cast<std::size_t>(i * spec->spatial_dim + a);
          const auto aj = static_cast<std::size_t>(j * spec->spatial_dim + a);
          const double d = minimal_image(x[ai] - x[aj], spec->box_length[static_cast<std::size_t>(a)]);
          e += 0.5 * k * d * d;
        }
    return e;
  });
  return {std::move(u), true};
}

/// Smooth periodic relational well U = k (L/2pi)^2 sum_{i<j,a} (1 - cos(2pi (x_i - x_j)/L)),
/// equal to k/2 d^2 for small separations.
inline Potential periodic_relational_harmonic(const SpecPtr& spec, double k) {
  auto u = ScalarField::from_function(spec, [&](std::span<const double> x) {
    double e = 0.0;
    for (int i = 0; i < spec->n_particles; ++i)
      for (int j = i + 1; j < spec->n_particles; ++j)
        for (int a = 0; a < spec->spatial_dim; ++a) {
          const double L = spec->box_length[static_cast<std::size_t>(a)];
          const double w = L / (2.0 * std::numbers::pi);
          const auto ai = static_cast<std::size_t>(i * spec->spatial_dim + a);
          const auto aj = static_cast<std::size_t>(j * spec->spatial_dim + a);
          e += k * w * w * (1.0 - std::cos((x[ai] - x[aj]) / w));
        }
    return e;
  });
  return {std::move(u), true};
}

inline Potential constant_potential(const SpecPtr& spec, double value) { return {ScalarField(spec, value), true}; }

/// Smallest |p| > 0 with p L / hbar in 2 pi Z, times `turns`.
inline double commensurate_momentum(const SystemSpec& spec, int axis, int turns) {
  return 2.0 * std::numbers::pi * spec.hbar * turns / spec.length_of_axis(axis);
}

}  // namespace red::presets
