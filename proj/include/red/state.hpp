#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "red/field.hpp"
#include "red/spectral.hpp"

namespace red {

/// An instant: the density rho together with the phase Phi on the grid.
///
/// Phi is stored as a periodic field plus a constant gradient offset
/// (`phase_tilt`, one entry per configuration axis):
///     Phi(x) = phase(x) + sum_A phase_tilt[A] * x^A.
/// Physics only reads Phi through its gradient and through exp(i Phi / hbar),
/// so linear phases such as boosts are carried exactly by the tilt.
struct EpistemicState {
  ScalarField rho;
  ScalarField phase;
  std::vector<double> phase_tilt;
  double time = 0.0;

  static constexpr double kNormTolerance = 1e-10;

  static EpistemicState make(ScalarField rho, ScalarField phase, std::vector<double> tilt = {}, double time = 0.0) {
    if (tilt.empty()) tilt.assign(static_cast<std::size_t>(rho.spec().config_dim()), 0.0);
    EpistemicState s{std::move(rho), std::move(phase), std::move(tilt), time};
    s.validate();
    return s;
  }

  const SystemSpec& spec() const { return rho.spec(); }
  const SpecPtr& spec_ptr() const { return rho.spec_ptr(); }

  void validate() const {
    rho.same_shape(phase);
    if (phase_tilt.size() != static_cast<std::size_t>(spec().config_dim()))
      throw ShapeError(detail::concat("phase tilt has ", phase_tilt.size(), " entries, configuration dimension is ",
                                      spec().config_dim()));
    if (!rho.all_finite() || !phase.all_finite()) throw NumericalError("state contains non-finite values");
    for (std::size_t i = 0; i < rho.size(); ++i)
      if (rho[i] < 0.0) throw DomainError(detail::concat("rho is negative at cell ", i, ": ", rho[i]));
    const double norm = quadrature(rho);
    if (std::abs(norm - 1.0) > kNormTolerance)
      throw DomainError(detail::concat("rho is not normalized: quadrature = ", norm));
  }
};

/// d Phi / dx^A on the grid, tilt included.
inline std::vector<ScalarField> phase_gradient(const EpistemicState& s) {
  auto g = gradient(s.phase);
  for (std::size_t A = 0; A < g.size(); ++A)
    for (double& v : g[A].values()) v += s.phase_tilt[A];
  return g;
}

/// Divides a non-negative field by its own quadrature.
inline ScalarField normalized(ScalarField rho) {
  const double q = quadrature(rho);
  if (!(q > 0.0)) throw DomainError("cannot normalize a field with non-positive integral");
  rho *= 1.0 / q;
  return rho;
}

/// K walkers in configuration space, stored walker-major (K x D).
struct Ensemble {
  SpecPtr spec;
  std::vector<double> positions;
  std::uint64_t rng_seed = 0;
  double time = 0.0;
  std::uint64_t step = 0;  // number of kernel steps taken; part of the RNG counter

  static Ensemble at_point(SpecPtr spec, const ConfigPoint& x0, std::size_t walkers, std::uint64_t seed) {
    Ensemble e{spec, {}, seed, 0.0, 0};
    auto w = wrap(x0, *spec);
    e.positions.reserve(walkers * w.coordinates.size());
    for (std::size_t k = 0; k < walkers; ++k) e.positions.insert(e.positions.end(), w.coordinates.begin(), w.coordinates.end());
    e.validate();
    return e;
  }

  std::size_t dim() const { return static_cast<std::size_t>(spec->config_dim()); }
  std::size_t size() const { return positions.size() / dim(); }
  std::span<const double> walker(std::size_t k) const { return {positions.data() + k * dim(), dim()}; }
  std::span<double> walker(std::size_t k) { return {positions.data() + k * dim(), dim()}; }
  ConfigPoint point(std::size_t k) const {
    auto w = walker(k);
    return {{w.begin(), w.end()}};
  }

  void validate() const {
    if (positions.empty() || positions.size() % dim() != 0)
      throw ShapeError(detail::concat("ensemble needs K >= 1 walkers of dimension ", dim(), ", got ",
                                      positions.size(), " coordinates"));
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const double L = spec->length_of_axis(static_cast<int>(i % dim()));
      if (!(positions[i] >= 0.0 && positions[i] < L))
        throw DomainError(detail::concat("walker ", i / dim(), " outside the box on axis ", i % dim()));
    }
  }
};

}  // namespace red
