#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <vector>

#include "red/error.hpp"

namespace red {

/// Physical and numerical description of an N-particle system on a periodic
/// box. Configuration axis A = n * spatial_dim + a belongs to particle n and
/// spatial axis a; its length is box_length[a] and its mass m_n.
struct SystemSpec {
  int n_particles = 1;
  int spatial_dim = 1;
  std::vector<double> masses{1.0};
  double hbar = 1.0;
  std::vector<double> box_length{1.0};
  std::vector<int> grid_points{64};
  double dt = 0.01;
  std::size_t grid_budget = std::size_t{1} << 22;

  int config_dim() const { return n_particles * spatial_dim; }
  int particle_of(int axis) const { return axis / spatial_dim; }
  int spatial_axis_of(int axis) const { return axis % spatial_dim; }
  double mass_of_axis(int axis) const { return masses[particle_of(axis)]; }
  double length_of_axis(int axis) const { return box_length[spatial_axis_of(axis)]; }
  double spacing(int axis) const { return length_of_axis(axis) / grid_points[axis]; }

  double total_mass() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (int g : grid_points) n *= static_cast<std::size_t>(g);
    return n;
  }

  double volume() const {
    double v = 1.0;
    for (int A = 0; A < config_dim(); ++A) v *= length_of_axis(A);
    return v;
  }

  double cell_volume() const { return volume() / static_cast<double>(cell_count()); }

  /// Throws DomainError describing the first broken invariant.
  void validate() const {
    using detail::concat;
    if (n_particles < 1) throw DomainError(concat("n_particles must be >= 1, got ", n_particles));
    if (spatial_dim < 1 || spatial_dim > 3)
      throw DomainError(concat("spatial_dim must be in {1,2,3}, got ", spatial_dim));
    if (masses.size() != static_cast<std::size_t>(n_particles))
      throw DomainError(concat("expected ", n_particles, " masses, got ", masses.size()));
    for (std::size_t n = 0; n < masses.size(); ++n)
      if (!(masses[n] > 0.0) || !std::isfinite(masses[n]))
        throw DomainError(concat("mass ", n, " must be positive, got ", masses[n]));
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw DomainError(concat("hbar must be positive, got ", hbar));
    if (box_length.size() != static_cast<std::size_t>(spatial_dim))
      throw DomainError(concat("expected ", spatial_dim, " box lengths, got ", box_length.size()));
    for (std::size_t a = 0; a < box_length.size(); ++a)
      if (!(box_length[a] > 0.0) || !std::isfinite(box_length[a]))
        throw DomainError(concat("box_length ", a, " must be positive, got ", box_length[a]));
    if (grid_points.size() != static_cast<std::size_t>(config_dim()))
      throw DomainError(concat("expected ", config_dim(), " grid sizes, got ", grid_points.size()));
    for (std::size_t A = 0; A < grid_points.size(); ++A)
      if (grid_points[A] < 1) throw DomainError(concat("grid_points ", A, " must be positive, got ", grid_points[A]));
    if (cell_count() > grid_budget)
      throw DomainError(concat("grid has ", cell_count(), " cells, budget is ", grid_budget));
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError(concat("dt must be positive, got ", dt));
  }
};

using SpecPtr = std::shared_ptr<const SystemSpec>;

inline SpecPtr make_spec(SystemSpec spec) {
  spec.validate();
  return std::make_shared<const SystemSpec>(std::move(spec));
}

}  // namespace red
