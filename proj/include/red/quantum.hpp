#pragma once

#include <complex>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "red/fields.hpp"
#include "red/geometry.hpp"
#include "red/rng.hpp"
#include "red/spectral.hpp"
#include "red/state.hpp"

namespace red {

using Complex = std::complex<double>;

/// Psi = rho^(1/2) exp(i Phi / hbar) on the grid.
struct WaveField {
  SpecPtr spec;
  std::vector<Complex> values;
  double time = 0.0;

  std::size_t size() const { return values.size(); }
};

/// Scalar potential U on the grid; `relational` is a declaration that
/// relational_check is expected to confirm.
struct Potential {
  ScalarField values;
  bool relational = false;

  static Potential zero(SpecPtr spec) { return {ScalarField(std::move(spec)), true}; }
};

inline ScalarField density(const WaveField& psi) {
  ScalarField rho(psi.spec);
  for (std::size_t i = 0; i < psi.size(); ++i) rho[i] = std::norm(psi.values[i]);
  return rho;
}

inline double norm(const WaveField& psi) { return quadrature(density(psi)); }

inline WaveField normalized(WaveField psi) {
  const double n = norm(psi);
  if (!(n > 0.0)) throw DomainError("cannot normalize a zero wavefunction");
  const double s = 1.0 / std::sqrt(n);
  for (auto& c : psi.values) c *= s;
  return psi;
}

namespace detail {

// True when exp(i tilt_A x^A / hbar) is periodic on every axis.
inline bool tilt_is_periodic(const SystemSpec& spec, std::span<const double> tilt, double tol = 1e-9) {
  for (int A = 0; A < spec.config_dim(); ++A) {
    const double turns = tilt[static_cast<std::size_t>(A)] * spec.length_of_axis(A) / (2.0 * std::numbers::pi * spec.hbar);
    if (std::abs(turns - std::nearbyint(turns)) > tol) return false;
  }
  return true;
}

}  // namespace detail

/// Psi = sqrt(rho) exp(i Phi / hbar); the tilt must wind an integer number
/// of times across each axis so that Psi is periodic.
inline WaveField to_wavefunction(const EpistemicState& state) {
  const auto& spec = state.spec();
  if (!detail::tilt_is_periodic(spec, state.phase_tilt))
    throw DomainError("to_wavefunction: phase tilt does not give a periodic wavefunction (need tilt * L / hbar in 2 pi Z)");
  GridIndexer grid(spec);
  std::vector<double> x(static_cast<std::size_t>(spec.config_dim()));
  WaveField psi{state.spec_ptr(), std::vector<Complex>(state.rho.size()), state.time};
  for (std::size_t i = 0; i < psi.size(); ++i) {
    node_coordinates(spec, grid, i, x);
    double phase = state.phase[i];
    for (std::size_t A = 0; A < x.size(); ++A) phase += state.phase_tilt[A] * x[A];
    psi.values[i] = std::polar(std::sqrt(std::max(state.rho[i], 0.0)), phase / spec.hbar);
  }
  return psi;
}

inline constexpr double kMaskThreshold = 1e-14;

/// State recovered from a wavefunction. Cells with |Psi|^2 below
/// kMaskThreshold * max carry no phase information and are masked.
struct WaveDecomposition {
  EpistemicState state;
  std::vector<bool> masked;
  std::size_t masked_cells = 0;
};

/// rho = |Psi|^2 and Phi = hbar arg Psi in (-pi hbar, pi hbar], tilt zero.
/// The wrapped phase is not meant to be differentiated; gradients of Phi
/// come from phase_gradient(const WaveField&).
inline WaveDecomposition from_wavefunction(const WaveField& psi) {
  const auto& spec = *psi.spec;
  auto rho = density(psi);
  const double cut = kMaskThreshold * rho.max();
  ScalarField phase(psi.spec);
  WaveDecomposition out{EpistemicState{rho, phase, std::vector<double>(static_cast<std::size_t>(spec.config_dim()), 0.0),
                                       psi.time},
                        std::vector<bool>(psi.size(), false), 0};
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (rho[i] < cut) {
      out.masked[i] = true;
      ++out.masked_cells;
      continue;
    }
    out.state.phase[i] = spec.hbar * std::arg(psi.values[i]);
  }
  return out;
}

/// d_A Phi = hbar Im(Psi* d_A Psi) / |Psi|^2, zero on masked cells.
inline std::vector<ScalarField> phase_gradient(const WaveField& psi) {
  const auto& spec = *psi.spec;
  auto rho = density(psi);
  const double cut = kMaskThreshold * rho.max();
  auto dpsi = spectral::gradient(std::span<const Complex>(psi.values), spec);
  std::vector<ScalarField> out;
  for (int A = 0; A < spec.config_dim(); ++A) {
    ScalarField g(psi.spec);
    const auto& d = dpsi[static_cast<std::size_t>(A)];
    for (std::size_t i = 0; i < psi.size(); ++i)
      g[i] = rho[i] < cut ? 0.0 : spec.hbar * (std::conj(psi.values[i]) * d[i]).imag() / rho[i];
    out.push_back(std::move(g));
  }
  return out;
}

/// Strang split-step propagator for
///   i hbar d_t Psi = sum_A (-i hbar d_A - m_n xi^a)^2 / 2 m_n Psi + U Psi.
/// All factors are unimodular, so the discrete norm is preserved.
class SchrodingerPropagator {
 public:
  SchrodingerPropagator(const Potential& u, const ShiftVelocity& shift, double dt) : spec_(u.values.spec_ptr()) {
    const auto& spec = *spec_;
    shift.check(spec);
    if (!(dt > 0.0)) throw DomainError(detail::concat("schrodinger_step: dt_pde must be positive, got ", dt));
    half_potential_.resize(u.values.size());
    for (std::size_t i = 0; i < half_potential_.size(); ++i)
      half_potential_[i] = std::polar(1.0, -u.values[i] * dt / (2.0 * spec.hbar));
    std::vector<double> energy(spec.cell_count(), 0.0);
    for (int A = 0; A < spec.config_dim(); ++A) {
      const double m = spec.mass_of_axis(A), lowered = m * shift.on_axis(spec, A);
      auto k = spectral::flat_wavenumbers(spec, A, false);
      for (std::size_t i = 0; i < energy.size(); ++i) {
        const double p = spec.hbar * k[i] - lowered;
        energy[i] += p * p / (2.0 * m);
      }
    }
    kinetic_.resize(energy.size());
    for (std::size_t i = 0; i < energy.size(); ++i) kinetic_[i] = std::polar(1.0, -energy[i] * dt / spec.hbar);
    dt_ = dt;
  }

  void advance(std::vector<Complex>& values) const {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] *= half_potential_[i];
    spectral::forward(values, spec_->grid_points);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] *= kinetic_[i];
    spectral::inverse(values, spec_->grid_points);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] *= half_potential_[i];
  }

  WaveField step(const WaveField& psi) const {
    WaveField out = psi;
    advance(out.values);
    for (const auto& c : out.values)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw NumericalError(detail::concat("schrodinger_step: non-finite wavefunction at t = ", psi.time + dt_));
    out.time = psi.time + dt_;
    return out;
  }

 private:
  SpecPtr spec_;
  std::vector<Complex> half_potential_;
  std::vector<Complex> kinetic_;
  double dt_ = 0.0;
};

inline WaveField schrodinger_step(const WaveField& psi, const Potential& u, const ShiftVelocity& shift, double dt_pde) {
  return SchrodingerPropagator(u, shift, dt_pde).step(psi);
}

inline constexpr double kHamiltonUnderflow = 1e-12;

/// One RK4 step of Hamilton's equations for H = H0 + integral rho U:
///   d_t rho = -d_A [rho (m^{AB} d_B Phi - xi^A)]
///   d_t Phi = -sum_A (d_A Phi - m_n xi^a)^2 / 2 m_n - U
///             + sum_A hbar^2 / (2 m_n) d_A^2 sqrt(rho) / sqrt(rho)
/// Only the periodic part of Phi evolves; its tilt is a constant of motion.
inline EpistemicState hamilton_step(const EpistemicState& state, const Potential& u, const ShiftVelocity& shift,
                                    double dt_pde) {
  const auto& spec = state.spec();
  shift.check(spec);
  if (!(dt_pde > 0.0)) throw DomainError(detail::concat("hamilton_step: dt_pde must be positive, got ", dt_pde));
  state.rho.same_shape(u.values);
  const int D = spec.config_dim();

  struct Pair {
    ScalarField rho, phase;
  };
  auto rhs = [&](const ScalarField& rho, const ScalarField& phase) -> Pair {
    const double lo = rho.min(), hi = rho.max();
    if (lo < kHamiltonUnderflow * hi)
      throw NumericalError(detail::concat("hamilton_step: rho underflow (min/max = ", lo / hi, " < ", kHamiltonUnderflow,
                                          "); the hydrodynamic form is singular near nodes, use the wavefunction path"));
    auto grad = gradient(phase);
    ScalarField sqrt_rho(rho.spec_ptr());
    for (std::size_t i = 0; i < rho.size(); ++i) sqrt_rho[i] = std::sqrt(rho[i]);
    ScalarField dphase(rho.spec_ptr());
    for (std::size_t i = 0; i < rho.size(); ++i) dphase[i] = -u.values[i];
    std::vector<ScalarField> flux;
    for (int A = 0; A < D; ++A) {
      const auto a = static_cast<std::size_t>(A);
      const double m = spec.mass_of_axis(A), lowered = m * shift.on_axis(spec, A);
      const double qc = spec.hbar * spec.hbar / (2.0 * m);
      auto lap = spectral::second_derivative(sqrt_rho, A);
      ScalarField f(rho.spec_ptr());
      for (std::size_t i = 0; i < rho.size(); ++i) {
        const double p = grad[a][i] + state.phase_tilt[a] - lowered;
        f[i] = rho[i] * p / m;
        dphase[i] += -p * p / (2.0 * m) + qc * lap[i] / sqrt_rho[i];
      }
      flux.push_back(std::move(f));
    }
    auto drho = spectral::divergence(flux);
    drho *= -1.0;
    return {std::move(drho), std::move(dphase)};
  };

  const auto& r0 = state.rho;
  const auto& p0 = state.phase;
  auto k1 = rhs(r0, p0);
  auto k2 = rhs(r0 + (0.5 * dt_pde) * k1.rho, p0 + (0.5 * dt_pde) * k1.phase);
  auto k3 = rhs(r0 + (0.5 * dt_pde) * k2.rho, p0 + (0.5 * dt_pde) * k2.phase);
  auto k4 = rhs(r0 + dt_pde * k3.rho, p0 + dt_pde * k3.phase);
  EpistemicState out{r0, p0, state.phase_tilt, state.time + dt_pde};
  const double w = dt_pde / 6.0;
  for (std::size_t i = 0; i < r0.size(); ++i) {
    out.rho[i] += w * (k1.rho[i] + 2.0 * k2.rho[i] + 2.0 * k3.rho[i] + k4.rho[i]);
    out.phase[i] += w * (k1.phase[i] + 2.0 * k2.phase[i] + 2.0 * k3.phase[i] + k4.phase[i]);
  }
  if (!out.rho.all_finite() || !out.phase.all_finite())
    throw NumericalError(detail::concat("hamilton_step: non-finite state at t = ", out.time));
  return out;
}

namespace detail {

// Sum_k w(k) |Psi_k|^2 dV / N, i.e. the quadrature of Psi* w(-i d) Psi.
template <typename Weight>
double spectral_expectation(const WaveField& psi, Weight&& weight) {
  const auto& spec = *psi.spec;
  auto hat = psi.values;
  spectral::forward(hat, spec.grid_points);
  std::vector<double> terms(hat.size());
  for (std::size_t i = 0; i < hat.size(); ++i) terms[i] = weight(i) * std::norm(hat[i]);
  return stable_sum(terms) * spec.cell_volume() / static_cast<double>(hat.size());
}

}  // namespace detail

/// <P_a> = sum_k hbar (sum_n k_{na}) |Psi_k|^2, per spatial axis.
inline std::vector<double> expected_momentum(const WaveField& psi) {
  const auto& spec = *psi.spec;
  std::vector<double> out(static_cast<std::size_t>(spec.spatial_dim));
  for (int a = 0; a < spec.spatial_dim; ++a) {
    std::vector<double> ktot(psi.size(), 0.0);
    for (int n = 0; n < spec.n_particles; ++n) {
      auto k = spectral::flat_wavenumbers(spec, n * spec.spatial_dim + a, true);
      for (std::size_t i = 0; i < k.size(); ++i) ktot[i] += k[i];
    }
    out[static_cast<std::size_t>(a)] =
        spec.hbar * detail::spectral_expectation(psi, [&](std::size_t i) { return ktot[i]; });
  }
  return out;
}

/// Position-space form: quadrature of Re[Psi* (-i hbar) sum_n d Psi / dx_n^a].
inline std::vector<double> expected_momentum_position_space(const WaveField& psi) {
  const auto& spec = *psi.spec;
  auto dpsi = spectral::gradient(std::span<const Complex>(psi.values), spec);
  std::vector<double> out(static_cast<std::size_t>(spec.spatial_dim));
  for (int a = 0; a < spec.spatial_dim; ++a) {
    std::vector<double> integrand(psi.size(), 0.0);
    for (int n = 0; n < spec.n_particles; ++n) {
      const auto& d = dpsi[static_cast<std::size_t>(n * spec.spatial_dim + a)];
      for (std::size_t i = 0; i < psi.size(); ++i) integrand[i] += spec.hbar * (std::conj(psi.values[i]) * d[i]).imag();
    }
    out[static_cast<std::size_t>(a)] = quadrature(spec, integrand);
  }
  return out;
}

/// <sum_A (p_A - m_n xi^a)^2 / 2 m_n>: equals the kinetic plus quantum
/// potential parts of H0 for the corresponding (rho, Phi).
inline double kinetic_energy(const WaveField& psi, const ShiftVelocity& shift) {
  const auto& spec = *psi.spec;
  shift.check(spec);
  std::vector<double> e(psi.size(), 0.0);
  for (int A = 0; A < spec.config_dim(); ++A) {
    const double m = spec.mass_of_axis(A), lowered = m * shift.on_axis(spec, A);
    auto k = spectral::flat_wavenumbers(spec, A, false);
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double p = spec.hbar * k[i] - lowered;
      e[i] += p * p / (2.0 * m);
    }
  }
  return detail::spectral_expectation(psi, [&](std::size_t i) { return e[i]; });
}

/// H = H0 + integral rho U.
inline double energy(const WaveField& psi, const Potential& u, const ShiftVelocity& shift) {
  return kinetic_energy(psi, shift) + quadrature(multiply(density(psi), u.values));
}

/// dS/dt = -sum_A (hbar / m_n) integral Im[(Psi*/Psi) (d_A Psi)^2], the
/// division-free form of integral rho m^{AB} d_A d_B Phi.
inline double entropy_rate(const WaveField& psi) {
  const auto& spec = *psi.spec;
  auto dpsi = spectral::gradient(std::span<const Complex>(psi.values), spec);
  std::vector<double> integrand(psi.size(), 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double r2 = std::norm(psi.values[i]);
    if (r2 == 0.0) continue;
    const Complex rot = std::conj(psi.values[i]) * std::conj(psi.values[i]) / r2;
    for (int A = 0; A < spec.config_dim(); ++A) {
      const auto& d = dpsi[static_cast<std::size_t>(A)][i];
      integrand[i] -= spec.hbar / spec.mass_of_axis(A) * (rot * d * d).imag();
    }
  }
  return quadrature(spec, integrand);
}

/// Mismatch report evaluated directly on a wavefunction.
inline MismatchReport info_metric_g(const WaveField& psi, const ShiftVelocity& shift) {
  MismatchReport r;
  r.constant_term = mismatch_constant(*psi.spec);
  r.entropy_term = -0.5 * psi.spec->hbar * entropy_rate(psi);
  r.h0_term = kinetic_energy(psi, shift);
  r.g_total = r.constant_term + r.entropy_term + r.h0_term;
  r.shift_used = shift;
  return r;
}

/// xi_best = <P> / M.
inline ShiftVelocity best_match_shift(const WaveField& psi) {
  auto P = expected_momentum(psi);
  const double M = psi.spec->total_mass();
  for (double& p : P) p /= M;
  return {P};
}

/// Multiplies Psi by exp(i sum_n m_n c_a x_n^a / hbar); the phase must be
/// periodic on the box.
inline WaveField galilean_boost(const WaveField& psi, std::span<const double> velocity) {
  const auto& spec = *psi.spec;
  std::vector<double> tilt(static_cast<std::size_t>(spec.config_dim()));
  for (int A = 0; A < spec.config_dim(); ++A)
    tilt[static_cast<std::size_t>(A)] = spec.mass_of_axis(A) * velocity[static_cast<std::size_t>(spec.spatial_axis_of(A))];
  if (!detail::tilt_is_periodic(spec, tilt))
    throw DomainError("galilean_boost: boost phase is not periodic on the box");
  GridIndexer grid(spec);
  std::vector<double> x(tilt.size());
  WaveField out = psi;
  for (std::size_t i = 0; i < out.size(); ++i) {
    node_coordinates(spec, grid, i, x);
    double phase = 0.0;
    for (std::size_t A = 0; A < x.size(); ++A) phase += tilt[A] * x[A];
    out.values[i] *= std::polar(1.0, phase / spec.hbar);
  }
  return out;
}

/// Prepares <P> = 0 by the boost -<P>/M.
inline WaveField remove_total_momentum(const WaveField& psi) {
  auto v = best_match_shift(psi).components;
  for (double& c : v) c = -c;
  return galilean_boost(psi, v);
}

struct RelationalReport {
  double max_deviation = 0.0;
  int trials = 0;
  bool passed = false;
};

inline constexpr double kRelationalTolerance = 1e-10;

/// Samples whole-cell global translations c and nodes x and reports
/// max |U(x + c) - U(x)|. A translation moves every particle by the same
/// physical distance, i.e. by a multiple of L_a / gcd of the grid sizes
/// along spatial axis a.
inline RelationalReport relational_check(const Potential& u, int trials, std::uint64_t seed) {
  const auto& spec = u.values.spec();
  GridIndexer grid(spec);
  std::vector<int> common(static_cast<std::size_t>(spec.spatial_dim), 0);
  for (int A = 0; A < spec.config_dim(); ++A) {
    auto& g = common[static_cast<std::size_t>(spec.spatial_axis_of(A))];
    g = std::gcd(g, spec.grid_points[static_cast<std::size_t>(A)]);
  }
  RelationalReport r;
  r.trials = trials;
  CounterRng rng(seed, 0x72656cULL);
  std::vector<int> idx(static_cast<std::size_t>(spec.config_dim()));
  for (int t = 0; t < trials; ++t) {
    std::vector<int> units(common.size());
    bool nonzero = false;
    for (std::size_t a = 0; a < common.size(); ++a) {
      units[a] = static_cast<int>(rng.below(static_cast<std::uint64_t>(common[a])));
      nonzero = nonzero || units[a] != 0;
    }
    if (!nonzero) {
      std::size_t a = rng.below(common.size());
      if (common[a] > 1) units[a] = 1;
    }
    const std::size_t cell = rng.below(grid.size());
    auto base = grid.multi(cell);
    for (int A = 0; A < spec.config_dim(); ++A) {
      const auto a = static_cast<std::size_t>(spec.spatial_axis_of(A));
      idx[static_cast<std::size_t>(A)] =
          base[static_cast<std::size_t>(A)] + units[a] * (spec.grid_points[static_cast<std::size_t>(A)] / common[a]);
    }
    r.max_deviation = std::max(r.max_deviation, std::abs(u.values[grid.flat(idx)] - u.values[cell]));
  }
  r.passed = r.max_deviation < kRelationalTolerance;
  return r;
}

/// -<sum_n dU/dx_n^a>, evaluated as integral U sum_n d rho / dx_n^a so that U
/// itself is never differentiated.
inline std::vector<double> expected_force(const WaveField& psi, const Potential& u) {
  const auto& spec = *psi.spec;
  auto grad_rho = gradient(density(psi));
  std::vector<double> out(static_cast<std::size_t>(spec.spatial_dim));
  for (int a = 0; a < spec.spatial_dim; ++a) {
    std::vector<double> integrand(psi.size(), 0.0);
    for (int n = 0; n < spec.n_particles; ++n) {
      const auto& g = grad_rho[static_cast<std::size_t>(n * spec.spatial_dim + a)];
      for (std::size_t i = 0; i < psi.size(); ++i) integrand[i] += u.values[i] * g[i];
    }
    out[static_cast<std::size_t>(a)] = quadrature(spec, integrand);
  }
  return out;
}

struct EhrenfestRow {
  double time = 0.0;
  std::vector<double> momentum;       // <P_a>
  std::vector<double> momentum_rate;  // central difference d<P_a>/dt
  std::vector<double> force;          // -<sum_n dU/dx_n^a>
};

/// Central-difference d<P>/dt at each interior snapshot next to the
/// expected force. Snapshots must be uniformly spaced in time.
inline std::vector<EhrenfestRow> ehrenfest_diagnostic(std::span<const WaveField> trajectory, const Potential& u) {
  if (trajectory.size() < 3) throw DomainError("ehrenfest_diagnostic: need at least 3 snapshots");
  const double h = trajectory[1].time - trajectory[0].time;
  if (!(h > 0.0)) throw DomainError("ehrenfest_diagnostic: snapshot times must increase");
  for (std::size_t j = 1; j < trajectory.size(); ++j) {
    const double hj = trajectory[j].time - trajectory[j - 1].time;
    if (std::abs(hj - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw DomainError(detail::concat("ehrenfest_diagnostic: snapshot spacing ", hj, " at index ", j,
                                       " differs from ", h));
  }
  std::vector<std::vector<double>> P;
  for (const auto& psi : trajectory) P.push_back(expected_momentum(psi));
  std::vector<EhrenfestRow> rows;
  for (std::size_t j = 1; j + 1 < trajectory.size(); ++j) {
    EhrenfestRow row{trajectory[j].time, P[j], {}, expected_force(trajectory[j], u)};
    for (std::size_t a = 0; a < P[j].size(); ++a) row.momentum_rate.push_back((P[j + 1][a] - P[j - 1][a]) / (2.0 * h));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace red
