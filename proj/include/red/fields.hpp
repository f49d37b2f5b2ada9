#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "red/field.hpp"
#include "red/spectral.hpp"
#include "red/state.hpp"

namespace red {

/// Current velocity V^A on the grid, one component per configuration axis.
struct VelocityField {
  std::vector<ScalarField> components;
};

inline constexpr double kDensityFloor = 1e-300;
inline constexpr double kPositivityMonitor = -1e-10;

namespace detail {

inline void require_positive_density(const ScalarField& rho, const char* what) {
  GridIndexer grid(rho.spec());
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (!(rho[i] >= kDensityFloor))
      throw DomainError(concat(what, ": rho = ", rho[i], " below floor ", kDensityFloor, " at cell (",
                               join(grid.multi(i), ","), ")"));
}

inline void monitor_positivity(const ScalarField& rho, const char* what) {
  const double lo = rho.min();
  if (lo < kPositivityMonitor)
    throw NumericalError(concat(what, ": density undershoot ", lo, " below monitor threshold ", kPositivityMonitor));
}

}  // namespace detail

/// Phi = hbar (phi - log rho^(1/2)), pointwise.
inline ScalarField phase_from_drift(const ScalarField& drift_phi, const ScalarField& rho) {
  drift_phi.same_shape(rho);
  detail::require_positive_density(rho, "phase_from_drift");
  const double hbar = rho.spec().hbar;
  ScalarField out(rho.spec_ptr());
  for (std::size_t i = 0; i < rho.size(); ++i) out[i] = hbar * (drift_phi[i] - 0.5 * std::log(rho[i]));
  return out;
}

/// Inverse of phase_from_drift: phi = Phi / hbar + log rho^(1/2).
inline ScalarField drift_from_phase(const ScalarField& phase, const ScalarField& rho) {
  phase.same_shape(rho);
  detail::require_positive_density(rho, "drift_from_phase");
  const double hbar = rho.spec().hbar;
  ScalarField out(rho.spec_ptr());
  for (std::size_t i = 0; i < rho.size(); ++i) out[i] = phase[i] / hbar + 0.5 * std::log(rho[i]);
  return out;
}

/// V^A = (1/m_n) d_A Phi - xi_dot^a.
inline VelocityField current_velocity(const EpistemicState& state, const ShiftVelocity& shift) {
  const auto& spec = state.spec();
  shift.check(spec);
  auto g = phase_gradient(state);
  for (int A = 0; A < spec.config_dim(); ++A) {
    const double inv_m = 1.0 / spec.mass_of_axis(A), xi = shift.on_axis(spec, A);
    for (double& v : g[static_cast<std::size_t>(A)].values()) v = inv_m * v - xi;
  }
  return {std::move(g)};
}

namespace detail {

// Largest dt with max_A |v_A| dt / h_A <= cfl.
inline double advective_limit(const SystemSpec& spec, std::span<const ScalarField> velocity, double cfl) {
  double rate = 0.0;
  for (int A = 0; A < spec.config_dim(); ++A) {
    const auto& v = velocity[static_cast<std::size_t>(A)];
    const double vmax = std::max(std::abs(v.min()), std::abs(v.max()));
    rate = std::max(rate, vmax / spec.spacing(A));
  }
  return rate > 0.0 ? cfl / rate : std::numeric_limits<double>::infinity();
}

template <typename Rhs>
ScalarField rk4(const ScalarField& y, double dt, Rhs&& rhs) {
  auto k1 = rhs(y);
  auto k2 = rhs(y + (0.5 * dt) * k1);
  auto k3 = rhs(y + (0.5 * dt) * k2);
  auto k4 = rhs(y + dt * k3);
  ScalarField out = y;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace detail

inline constexpr double kAdvectiveCfl = 0.5;
// Real-axis extent of the classical RK4 stability region is about 2.785.
inline constexpr double kDiffusiveRk4Limit = 2.5;

/// One RK4 step of d_t rho = -d_A(rho V^A) with Phi held fixed. Mass is
/// conserved because the spectral divergence has no k = 0 component.
inline EpistemicState fokker_planck_step(const EpistemicState& state, const ShiftVelocity& shift, double dt_pde) {
  if (!(dt_pde > 0.0)) throw DomainError(detail::concat("fokker_planck_step: dt_pde must be positive, got ", dt_pde));
  const auto& spec = state.spec();
  auto V = current_velocity(state, shift);
  const double limit = detail::advective_limit(spec, V.components, kAdvectiveCfl);
  if (dt_pde > limit)
    throw NumericalError(detail::concat("fokker_planck_step: dt_pde = ", dt_pde, " violates max|V| dt/h <= ",
                                        kAdvectiveCfl, "; admissible dt_pde <= ", limit));
  auto rhs = [&](const ScalarField& rho) {
    std::vector<ScalarField> flux;
    flux.reserve(V.components.size());
    for (const auto& v : V.components) flux.push_back(multiply(rho, v));
    auto div = spectral::divergence(flux);
    div *= -1.0;
    return div;
  };
  EpistemicState out{detail::rk4(state.rho, dt_pde, rhs), state.phase, state.phase_tilt, state.time + dt_pde};
  detail::monitor_positivity(out.rho, "fokker_planck_step");
  return out;
}

/// Fokker-Planck step for an externally prescribed drift phi: the phase is
/// slaved to (phi, rho), so the flux rho (hbar d_A phi / m_n - xi^a)
/// - (hbar / 2 m_n) d_A rho is re-evaluated at every RK4 stage.
/// `drift_gradient` holds d_A phi at the grid nodes.
inline ScalarField fokker_planck_drift_step(const ScalarField& rho, std::span<const ScalarField> drift_gradient,
                                            const ShiftVelocity& shift, double dt_pde) {
  if (!(dt_pde > 0.0)) throw DomainError(detail::concat("fokker_planck_drift_step: dt_pde must be positive, got ", dt_pde));
  const auto& spec = rho.spec();
  shift.check(spec);
  const int D = spec.config_dim();
  std::vector<ScalarField> drift_velocity;
  double diffusive_rate = 0.0;
  for (int A = 0; A < D; ++A) {
    const double m = spec.mass_of_axis(A), xi = shift.on_axis(spec, A);
    ScalarField v = drift_gradient[static_cast<std::size_t>(A)];
    for (double& x : v.values()) x = spec.hbar / m * x - xi;
    drift_velocity.push_back(std::move(v));
    const double kmax = std::numbers::pi / spec.spacing(A);
    diffusive_rate += spec.hbar / (2.0 * m) * kmax * kmax;
  }
  const double limit = std::min(detail::advective_limit(spec, drift_velocity, kAdvectiveCfl),
                                diffusive_rate > 0.0 ? kDiffusiveRk4Limit / diffusive_rate
                                                     : std::numeric_limits<double>::infinity());
  if (dt_pde > limit)
    throw NumericalError(detail::concat("fokker_planck_drift_step: dt_pde = ", dt_pde,
                                        " exceeds the stability bound; admissible dt_pde <= ", limit));
  auto rhs = [&](const ScalarField& r) {
    auto grad_r = gradient(r);
    std::vector<ScalarField> flux;
    flux.reserve(static_cast<std::size_t>(D));
    for (int A = 0; A < D; ++A) {
      const auto a = static_cast<std::size_t>(A);
      const double diff = spec.hbar / (2.0 * spec.mass_of_axis(A));
      ScalarField f(r.spec_ptr());
      for (std::size_t i = 0; i < r.size(); ++i) f[i] = r[i] * drift_velocity[a][i] - diff * grad_r[a][i];
      flux.push_back(std::move(f));
    }
    auto div = spectral::divergence(flux);
    div *= -1.0;
    return div;
  };
  auto out = detail::rk4(rho, dt_pde, rhs);
  detail::monitor_positivity(out, "fokker_planck_drift_step");
  return out;
}

/// S = -integral rho log rho, with 0 log 0 = 0 (non-positive cells contribute nothing).
inline double entropy(const ScalarField& rho) {
  std::vector<double> integrand(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) integrand[i] = rho[i] > 0.0 ? -rho[i] * std::log(rho[i]) : 0.0;
  return quadrature(rho.spec(), integrand);
}

/// dS/dt = integral rho m^{AB} d_A d_B Phi. This is the rate obtained from
/// the continuity equation; the tilt has no second derivative.
inline double entropy_rate(const EpistemicState& state) {
  const auto& spec = state.spec();
  std::vector<double> integrand(state.rho.size(), 0.0);
  for (int A = 0; A < spec.config_dim(); ++A) {
    auto d2 = spectral::second_derivative(state.phase, A);
    const double inv_m = 1.0 / spec.mass_of_axis(A);
    for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] += inv_m * state.rho[i] * d2[i];
  }
  return quadrature(spec, integrand);
}

}  // namespace red
