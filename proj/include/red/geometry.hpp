#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

#include "red/fields.hpp"
#include "red/parallel.hpp"
#include "red/rng.hpp"
#include "red/sampler.hpp"
#include "red/spectral.hpp"
#include "red/state.hpp"

namespace red {

/// Information-metric mismatch G between successive instants and its split
/// G = constant_term + entropy_term + h0_term.
struct MismatchReport {
  double g_total = 0.0;
  double constant_term = 0.0;  // D hbar / (4 dt)
  double entropy_term = 0.0;   // -(hbar / 2) dS/dt
  double h0_term = 0.0;        // ensemble Hamiltonian without potential
  ShiftVelocity shift_used;
};

/// D hbar / (4 dt) with D = n_particles * spatial_dim (3N hbar / 4 dt in 3-D space).
inline double mismatch_constant(const SystemSpec& spec) { return spec.config_dim() * spec.hbar / (4.0 * spec.dt); }

struct HamiltonianTerms {
  double kinetic = 0.0;  // sum_A integral rho (d_A Phi - m_n xi^a)^2 / 2 m_n
  double quantum = 0.0;  // sum_A integral hbar^2 (d_A sqrt rho)^2 / 2 m_n
  double total() const { return kinetic + quantum; }
};

namespace detail {

inline ScalarField sqrt_density(const ScalarField& rho) {
  ScalarField out(rho.spec_ptr());
  for (std::size_t i = 0; i < rho.size(); ++i) out[i] = std::sqrt(std::max(rho[i], 0.0));
  return out;
}

inline double quantum_potential_energy(const ScalarField& rho) {
  const auto& spec = rho.spec();
  auto g = gradient(sqrt_density(rho));
  std::vector<double> integrand(rho.size(), 0.0);
  for (int A = 0; A < spec.config_dim(); ++A) {
    const double c = spec.hbar * spec.hbar / (2.0 * spec.mass_of_axis(A));
    const auto& ga = g[static_cast<std::size_t>(A)];
    for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] += c * ga[i] * ga[i];
  }
  return quadrature(spec, integrand);
}

inline double kinetic_energy(const ScalarField& rho, std::span<const ScalarField> grad_phase, const ShiftVelocity& shift) {
  const auto& spec = rho.spec();
  std::vector<double> integrand(rho.size(), 0.0);
  for (int A = 0; A < spec.config_dim(); ++A) {
    const double m = spec.mass_of_axis(A), lowered = m * shift.on_axis(spec, A);
    const auto& ga = grad_phase[static_cast<std::size_t>(A)];
    for (std::size_t i = 0; i < integrand.size(); ++i) {
      const double p = ga[i] - lowered;
      integrand[i] += rho[i] * p * p / (2.0 * m);
    }
  }
  return quadrature(spec, integrand);
}

}  // namespace detail

inline HamiltonianTerms ensemble_hamiltonian_terms(const EpistemicState& state, const ShiftVelocity& shift) {
  shift.check(state.spec());
  auto g = phase_gradient(state);
  return {detail::kinetic_energy(state.rho, g, shift), detail::quantum_potential_energy(state.rho)};
}

/// H0[rho, Phi] with the mass-lowered shift m_n xi^a in the kinetic term.
inline double ensemble_hamiltonian_h0(const EpistemicState& state, const ShiftVelocity& shift) {
  return ensemble_hamiltonian_terms(state, shift).total();
}

inline MismatchReport info_metric_g(const EpistemicState& state, const ShiftVelocity& shift) {
  MismatchReport r;
  r.constant_term = mismatch_constant(state.spec());
  r.entropy_term = -0.5 * state.spec().hbar * entropy_rate(state);
  r.h0_term = ensemble_hamiltonian_h0(state, shift);
  r.g_total = r.constant_term + r.entropy_term + r.h0_term;
  r.shift_used = shift;
  return r;
}

/// Same report from a density and a drift gradient, without ever forming
/// log rho: G = const + (1/2) integral rho m^{AB} (hbar d_A phi - m xi)(...),
/// dS/dt = -hbar integral m^{AB} d_A rho d_B phi + 2 hbar integral m^{AB}
/// d_A sqrt(rho) d_B sqrt(rho), and H0 is the remainder.
inline MismatchReport info_metric_g_drift(const ScalarField& rho, std::span<const ScalarField> drift_gradient,
                                          const ShiftVelocity& shift) {
  const auto& spec = rho.spec();
  shift.check(spec);
  const double hbar = spec.hbar;
  auto grad_rho = gradient(rho);
  auto grad_sqrt = gradient(detail::sqrt_density(rho));
  std::vector<double> g_integrand(rho.size(), 0.0), s_integrand(rho.size(), 0.0);
  for (int A = 0; A < spec.config_dim(); ++A) {
    const auto a = static_cast<std::size_t>(A);
    const double m = spec.mass_of_axis(A), lowered = m * shift.on_axis(spec, A);
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const double w = hbar * drift_gradient[a][i] - lowered;
      g_integrand[i] += 0.5 * rho[i] * w * w / m;
      s_integrand[i] += (-hbar * grad_rho[a][i] * drift_gradient[a][i] + 2.0 * hbar * grad_sqrt[a][i] * grad_sqrt[a][i]) / m;
    }
  }
  MismatchReport r;
  r.constant_term = mismatch_constant(spec);
  r.g_total = r.constant_term + quadrature(spec, g_integrand);
  r.entropy_term = -0.5 * hbar * quadrature(spec, s_integrand);
  r.h0_term = r.g_total - r.constant_term - r.entropy_term;
  r.shift_used = shift;
  return r;
}

/// Monte-Carlo estimate with its standard error.
struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

inline constexpr std::size_t kMinMcSamples = 1000;

/// Estimates G = C integral dx rho integral dx' P [d_t' log P]^2 with
/// C = hbar dt / 2 directly from its definition: x is drawn from rho over
/// the grid nodes (weight rho_i dV), x' from the sampler's kernel, and the
/// t'-derivative of the Gaussian log-density is taken analytically (both the
/// mean and the variance of the kernel scale with dt).
inline McEstimate info_metric_g_mc(const EpistemicState& state, const DriftPotential& drift, const ShiftVelocity& shift,
                                   std::size_t samples, std::uint64_t seed) {
  const auto& spec = state.spec();
  shift.check(spec);
  if (samples < kMinMcSamples)
    throw DomainError(detail::concat("info_metric_g_mc: need at least ", kMinMcSamples, " samples, got ", samples));
  const int D = spec.config_dim();
  GridIndexer grid(spec);

  // (rho, phi, Phi) must satisfy Phi = hbar (phi - log sqrt rho) up to a constant.
  {
    const double rho_max = state.rho.max();
    std::vector<double> x(static_cast<std::size_t>(D));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < state.rho.size(); ++i) {
      if (state.rho[i] < 1e-10 * rho_max) continue;
      node_coordinates(spec, grid, i, x);
      double phase = state.phase[i];
      for (int A = 0; A < D; ++A) phase += state.phase_tilt[static_cast<std::size_t>(A)] * x[static_cast<std::size_t>(A)];
      const double d = drift.value(x) - phase / spec.hbar - 0.5 * std::log(state.rho[i]);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    if (hi - lo > 1e-6)
      throw DomainError(detail::concat("info_metric_g_mc: drift, density and phase are inconsistent (phi - Phi/hbar - "
                                       "log sqrt(rho) varies by ",
                                       hi - lo, ")"));
  }

  std::vector<double> cdf(state.rho.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = (acc += std::max(state.rho[i], 0.0));

  const double dt = spec.dt, C = spec.hbar * dt / 2.0;
  std::vector<double> values(samples);
  std::atomic<bool> failed{false};
  parallel_for(samples, [&](std::size_t j) {
    if (failed) return;
    CounterRng rng(seed, j, 0x6d63ULL);
    const double u = rng.uniform() * acc;
    const auto cell = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()), cdf.size() - 1);
    ConfigPoint x{std::vector<double>(static_cast<std::size_t>(D))};
    node_coordinates(spec, grid, cell, x.coordinates);
    TransitionKernel kernel;
    try {
      kernel = build_kernel(x, drift, shift, spec);
    } catch (...) {
      failed = true;
      return;
    }
    const auto next = sample_step(kernel, rng, spec);
    double dlogp = 0.0;
    for (int A = 0; A < D; ++A) {
      const auto a = static_cast<std::size_t>(A);
      const double step = minimal_image(next.coordinates[a] - x.coordinates[a], spec.length_of_axis(A));
      const double velocity = kernel.mean_step[a] / dt, variance = kernel.covariance_diag[a];
      const double r = step - kernel.mean_step[a];
      dlogp += -0.5 / dt + r * velocity / variance + r * r / (2.0 * variance * dt);
    }
    values[j] = C * dlogp * dlogp;
  });
  if (failed) throw NumericalError("info_metric_g_mc: kernel construction failed at a sampled point");
  McEstimate est;
  est.samples = samples;
  est.mean = detail::stable_sum(values) / static_cast<double>(samples);
  std::vector<double> sq(samples);
  for (std::size_t j = 0; j < samples; ++j) sq[j] = (values[j] - est.mean) * (values[j] - est.mean);
  const double var = detail::stable_sum(sq) / static_cast<double>(samples - 1);
  est.standard_error = std::sqrt(var / static_cast<double>(samples));
  return est;
}

/// Expected total momentum P_a = integral rho sum_n dPhi/dx_n^a.
inline std::vector<double> total_momentum(const EpistemicState& state) {
  const auto& spec = state.spec();
  auto g = phase_gradient(state);
  std::vector<double> out(static_cast<std::size_t>(spec.spatial_dim));
  for (int a = 0; a < spec.spatial_dim; ++a) {
    std::vector<double> integrand(state.rho.size(), 0.0);
    for (int n = 0; n < spec.n_particles; ++n) {
      const auto& ga = g[static_cast<std::size_t>(n * spec.spatial_dim + a)];
      for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] += state.rho[i] * ga[i];
    }
    out[static_cast<std::size_t>(a)] = quadrature(spec, integrand);
  }
  return out;
}

/// dG/dxi_a = sum_n integral rho (m_n xi_a - dPhi/dx_n^a), by quadrature.
inline std::vector<double> mismatch_gradient(const EpistemicState& state, const ShiftVelocity& shift) {
  const auto& spec = state.spec();
  shift.check(spec);
  auto g = phase_gradient(state);
  std::vector<double> out(static_cast<std::size_t>(spec.spatial_dim));
  for (int a = 0; a < spec.spatial_dim; ++a) {
    std::vector<double> integrand(state.rho.size(), 0.0);
    for (int n = 0; n < spec.n_particles; ++n) {
      const double lowered = spec.masses[static_cast<std::size_t>(n)] * shift.components[static_cast<std::size_t>(a)];
      const auto& ga = g[static_cast<std::size_t>(n * spec.spatial_dim + a)];
      for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] += state.rho[i] * (lowered - ga[i]);
    }
    out[static_cast<std::size_t>(a)] = quadrature(spec, integrand);
  }
  return out;
}

enum class BestMatchMode { closed_form, numerical };

struct BestMatchOptions {
  double gradient_tolerance = 1e-10;
  int max_iterations = 10000;
  bool use_hessian = false;  // Newton steps with the analytic Hessian M * identity
};

struct BestMatchResult {
  ShiftVelocity shift;
  int iterations = 0;
  double gradient_norm = 0.0;
};

namespace detail {

// G restricted to its shift-dependent part, with cached d Phi.
class ShiftObjective {
 public:
  explicit ShiftObjective(const EpistemicState& state) : state_(state), grad_phase_(phase_gradient(state)) {}

  double value(const ShiftVelocity& xi) const { return kinetic_energy(state_.rho, grad_phase_, xi); }

  std::vector<double> gradient(const ShiftVelocity& xi) const {
    const auto& spec = state_.spec();
    std::vector<double> out(static_cast<std::size_t>(spec.spatial_dim));
    std::vector<double> integrand(state_.rho.size());
    for (int a = 0; a < spec.spatial_dim; ++a) {
      std::fill(integrand.begin(), integrand.end(), 0.0);
      for (int n = 0; n < spec.n_particles; ++n) {
        const double lowered = spec.masses[static_cast<std::size_t>(n)] * xi.components[static_cast<std::size_t>(a)];
        const auto& ga = grad_phase_[static_cast<std::size_t>(n * spec.spatial_dim + a)];
        for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] += state_.rho[i] * (lowered - ga[i]);
      }
      out[static_cast<std::size_t>(a)] = quadrature(spec, integrand);
    }
    return out;
  }

 private:
  const EpistemicState& state_;
  std::vector<ScalarField> grad_phase_;
};

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

/// Entropic best matching over global shifts. Closed form: M xi_a = P_a.
/// Numerical: minimizes G over xi by gradient descent (Barzilai-Borwein
/// steps with Armijo backtracking) or Newton steps, using the analytic
/// gradient evaluated by quadrature.
inline BestMatchResult best_match(const EpistemicState& state, BestMatchMode mode, const BestMatchOptions& options = {}) {
  const auto& spec = state.spec();
  const double M = spec.total_mass();
  if (mode == BestMatchMode::closed_form) {
    auto P = total_momentum(state);
    for (double& p : P) p /= M;
    ShiftVelocity xi{P};
    return {xi, 0, detail::norm2(mismatch_gradient(state, xi))};
  }

  detail::ShiftObjective objective(state);
  ShiftVelocity xi = ShiftVelocity::zero(spec);
  auto g = objective.gradient(xi);
  double f = objective.value(xi);
  std::vector<double> prev_xi, prev_g;
  double step = 1.0;
  int it = 0;
  while (detail::norm2(g) >= options.gradient_tolerance) {
    if (it >= options.max_iterations)
      throw NumericalError(detail::concat("best_match: no convergence after ", options.max_iterations,
                                          " iterations (|dG/dxi| = ", detail::norm2(g), ")"));
    ++it;
    ShiftVelocity trial = xi;
    if (options.use_hessian) {
      for (std::size_t a = 0; a < g.size(); ++a) trial.components[a] -= g[a] / M;
    } else {
      if (!prev_g.empty()) {
        double sy = 0.0, ss = 0.0;
        for (std::size_t a = 0; a < g.size(); ++a) {
          const double s = xi.components[a] - prev_xi[a], y = g[a] - prev_g[a];
          sy += s * y;
          ss += s * s;
        }
        if (sy > 0.0) step = ss / sy;
      }
      const double gg = detail::norm2(g) * detail::norm2(g);
      for (int backtrack = 0;; ++backtrack) {
        for (std::size_t a = 0; a < g.size(); ++a) trial.components[a] = xi.components[a] - step * g[a];
        if (objective.value(trial) <= f - 1e-4 * step * gg || backtrack > 60) break;
        step *= 0.5;
      }
    }
    prev_xi = xi.components;
    prev_g = g;
    xi = trial;
    f = objective.value(xi);
    g = objective.gradient(xi);
  }
  return {xi, it, detail::norm2(g)};
}

inline ShiftVelocity best_match_shift(const EpistemicState& state, BestMatchMode mode) {
  return best_match(state, mode).shift;
}

}  // namespace red
