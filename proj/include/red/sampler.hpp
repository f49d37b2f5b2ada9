#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "red/field.hpp"
#include "red/parallel.hpp"
#include "red/rng.hpp"
#include "red/spectral.hpp"
#include "red/state.hpp"

namespace red {

/// Drift potential phi, either in closed form or sampled on the grid.
///
/// Grid drifts carry the same periodic-part-plus-tilt split as the phase
/// (phi(x) = values(x) + tilt . x); their gradient is the spectral gradient
/// interpolated multilinearly to off-grid points.
class DriftPotential {
 public:
  using ValueFn = std::function<double(std::span<const double>)>;
  using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

  static DriftPotential constant(int dim) { return linear(std::vector<double>(static_cast<std::size_t>(dim), 0.0)); }

  /// phi(x) = slope . x
  static DriftPotential linear(std::vector<double> slope) {
    DriftPotential d;
    d.dim_ = static_cast<int>(slope.size());
    d.value_ = [slope](std::span<const double> x) {
      double v = 0.0;
      for (std::size_t A = 0; A < slope.size(); ++A) v += slope[A] * x[A];
      return v;
    };
    d.gradient_ = [slope](std::span<const double>, std::span<double> g) { std::copy(slope.begin(), slope.end(), g.begin()); };
    return d;
  }

  static DriftPotential closed_form(int dim, ValueFn value, GradientFn grad) {
    DriftPotential d;
    d.dim_ = dim;
    d.value_ = std::move(value);
    d.gradient_ = std::move(grad);
    return d;
  }

  static DriftPotential on_grid(ScalarField phi, std::vector<double> tilt = {}) {
    const int dim = phi.spec().config_dim();
    if (tilt.empty()) tilt.assign(static_cast<std::size_t>(dim), 0.0);
    if (tilt.size() != static_cast<std::size_t>(dim))
      throw ShapeError(detail::concat("drift tilt has ", tilt.size(), " entries, expected ", dim));
    auto data = std::make_shared<GridData>(GridData{phi, spectral::gradient(phi), std::move(tilt)});
    DriftPotential d;
    d.dim_ = dim;
    d.grid_ = data;
    d.value_ = [data](std::span<const double> x) {
      double v = interpolate(data->phi, x);
      for (std::size_t A = 0; A < data->tilt.size(); ++A) v += data->tilt[A] * x[A];
      return v;
    };
    d.gradient_ = [data](std::span<const double> x, std::span<double> g) {
      for (std::size_t A = 0; A < data->tilt.size(); ++A) g[A] = interpolate(data->grad[A], x) + data->tilt[A];
    };
    return d;
  }

  int dim() const { return dim_; }
  bool is_grid() const { return grid_ != nullptr; }

  double value(std::span<const double> x) const { return value_(x); }
  void gradient(std::span<const double> x, std::span<double> out) const { gradient_(x, out); }

  /// Gradient at every grid node of `spec` (exact node values for grid drifts).
  std::vector<ScalarField> gradient_on_grid(const SpecPtr& spec) const {
    if (grid_ && grid_->phi.spec().grid_points == spec->grid_points) {
      auto g = grid_->grad;
      for (std::size_t A = 0; A < g.size(); ++A)
        for (double& v : g[A].values()) v += grid_->tilt[A];
      return g;
    }
    const int D = spec->config_dim();
    std::vector<ScalarField> out(static_cast<std::size_t>(D), ScalarField(spec));
    GridIndexer grid(*spec);
    std::vector<double> x(static_cast<std::size_t>(D)), g(static_cast<std::size_t>(D));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      node_coordinates(*spec, grid, i, x);
      gradient_(x, g);
      for (int A = 0; A < D; ++A) out[static_cast<std::size_t>(A)][i] = g[static_cast<std::size_t>(A)];
    }
    return out;
  }

  ScalarField values_on_grid(const SpecPtr& spec) const {
    return ScalarField::from_function(spec, [this](std::span<const double> x) { return value_(x); });
  }

  /// Multilinear periodic interpolation of a grid field at an arbitrary point.
  static double interpolate(const ScalarField& f, std::span<const double> x) {
    const auto& spec = f.spec();
    const int D = spec.config_dim();
    GridIndexer grid(spec);
    std::vector<int> base(static_cast<std::size_t>(D));
    std::vector<double> frac(static_cast<std::size_t>(D));
    for (int A = 0; A < D; ++A) {
      const double u = wrap_coordinate(x[static_cast<std::size_t>(A)], spec.length_of_axis(A)) / spec.spacing(A);
      const double fl = std::floor(u);
      base[static_cast<std::size_t>(A)] = static_cast<int>(fl);
      frac[static_cast<std::size_t>(A)] = u - fl;
    }
    double acc = 0.0;
    std::vector<int> corner(static_cast<std::size_t>(D));
    for (unsigned mask = 0; mask < (1u << D); ++mask) {
      double w = 1.0;
      for (int A = 0; A < D; ++A) {
        const bool up = (mask >> A) & 1u;
        corner[static_cast<std::size_t>(A)] = base[static_cast<std::size_t>(A)] + (up ? 1 : 0);
        w *= up ? frac[static_cast<std::size_t>(A)] : 1.0 - frac[static_cast<std::size_t>(A)];
      }
      if (w != 0.0) acc += w * f[grid.flat(corner)];
    }
    return acc;
  }

 private:
  struct GridData {
    ScalarField phi;
    std::vector<ScalarField> grad;
    std::vector<double> tilt;
  };

  int dim_ = 0;
  ValueFn value_;
  GradientFn gradient_;
  std::shared_ptr<const GridData> grid_;
};

/// Gaussian short-step kernel P(x'|x): independent components with
/// mean hbar dt / m_n * d_A phi - xi_dot^a dt and variance hbar dt / m_n.
struct TransitionKernel {
  ConfigPoint origin;
  std::vector<double> mean_step;
  std::vector<double> covariance_diag;
};

inline TransitionKernel build_kernel(const ConfigPoint& x, const DriftPotential& drift, const ShiftVelocity& shift,
                                     const SystemSpec& spec) {
  if (!(spec.dt > 0.0)) throw DomainError(detail::concat("build_kernel: dt must be positive, got ", spec.dt));
  shift.check(spec);
  const int D = spec.config_dim();
  if (drift.dim() != D || x.coordinates.size() != static_cast<std::size_t>(D))
    throw ShapeError(detail::concat("build_kernel: expected dimension ", D, ", drift has ", drift.dim(), ", point has ",
                                    x.coordinates.size()));
  std::vector<double> grad(static_cast<std::size_t>(D));
  drift.gradient(x.coordinates, grad);
  TransitionKernel k{x, std::vector<double>(static_cast<std::size_t>(D)), std::vector<double>(static_cast<std::size_t>(D))};
  for (int A = 0; A < D; ++A) {
    const auto a = static_cast<std::size_t>(A);
    if (!std::isfinite(grad[a]))
      throw NumericalError(detail::concat("build_kernel: drift gradient is not finite on axis ", A));
    const double m = spec.mass_of_axis(A);
    k.mean_step[a] = spec.hbar * spec.dt / m * grad[a] - shift.on_axis(spec, A) * spec.dt;
    k.covariance_diag[a] = spec.hbar * spec.dt / m;
  }
  return k;
}

/// One draw from the kernel, wrapped into the box.
inline ConfigPoint sample_step(const TransitionKernel& kernel, CounterRng& rng, const SystemSpec& spec) {
  ConfigPoint out = kernel.origin;
  for (std::size_t A = 0; A < out.coordinates.size(); ++A)
    out.coordinates[A] += kernel.mean_step[A] + std::sqrt(kernel.covariance_diag[A]) * rng.normal();
  return wrap(out, spec);
}

/// Advances every walker through `steps` independent kernel draws. Walker k
/// at global step s uses the stream (rng_seed, k, s), so the result does not
/// depend on how walkers are scheduled.
inline Ensemble evolve_ensemble(const Ensemble& e, const DriftPotential& drift, const ShiftVelocity& shift, int steps) {
  if (steps < 0) throw DomainError(detail::concat("evolve_ensemble: steps must be >= 0, got ", steps));
  const SystemSpec& spec = *e.spec;
  if (!(spec.dt > 0.0)) throw DomainError("evolve_ensemble: dt must be positive");
  shift.check(spec);
  if (drift.dim() != spec.config_dim()) throw ShapeError("evolve_ensemble: drift dimension mismatch");
  Ensemble out = e;
  if (steps == 0) return out;

  const std::size_t D = e.dim();
  std::vector<double> scale(D), lifted_shift(D), lengths(D);
  for (std::size_t A = 0; A < D; ++A) {
    scale[A] = spec.hbar * spec.dt / spec.mass_of_axis(static_cast<int>(A));
    lifted_shift[A] = shift.on_axis(spec, static_cast<int>(A)) * spec.dt;
    lengths[A] = spec.length_of_axis(static_cast<int>(A));
  }
  std::atomic<bool> bad_gradient{false};
  parallel_for(out.size(), [&](std::size_t k) {
    std::vector<double> grad(D);
    auto w = out.walker(k);
    for (int s = 0; s < steps; ++s) {
      CounterRng rng(e.rng_seed, k, e.step + static_cast<std::uint64_t>(s));
      drift.gradient(w, grad);
      for (std::size_t A = 0; A < D; ++A) {
        if (!std::isfinite(grad[A])) bad_gradient = true;
        const double mean = scale[A] * grad[A] - lifted_shift[A];
        w[A] = wrap_coordinate(w[A] + mean + std::sqrt(scale[A]) * rng.normal(), lengths[A]);
      }
    }
  });
  if (bad_gradient) throw NumericalError("evolve_ensemble: drift gradient is not finite at some walker");
  out.step += static_cast<std::uint64_t>(steps);
  out.time += steps * spec.dt;
  return out;
}

/// Sample mean, unbiased variance and covariance of per-walker displacements.
struct Moments {
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> covariance;  // D x D, row-major
  std::size_t count = 0;

  double cov(std::size_t A, std::size_t B) const { return covariance[A * mean.size() + B]; }
  double standard_error(std::size_t A) const { return std::sqrt(variance[A] / static_cast<double>(count)); }
};

inline Moments empirical_moments(const Ensemble& before, const Ensemble& after) {
  if (before.size() != after.size() || before.dim() != after.dim())
    throw ShapeError(detail::concat("empirical_moments: walker counts differ (", before.size(), " vs ", after.size(), ")"));
  const std::size_t K = before.size(), D = before.dim();
  std::vector<double> disp(K * D);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t A = 0; A < D; ++A)
      disp[k * D + A] = minimal_image(after.positions[k * D + A] - before.positions[k * D + A],
                                      before.spec->length_of_axis(static_cast<int>(A)));
  Moments m{std::vector<double>(D, 0.0), std::vector<double>(D, 0.0), std::vector<double>(D * D, 0.0), K};
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t A = 0; A < D; ++A) m.mean[A] += disp[k * D + A];
  for (double& v : m.mean) v /= static_cast<double>(K);
  if (K > 1) {
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t A = 0; A < D; ++A)
        for (std::size_t B = 0; B < D; ++B)
          m.covariance[A * D + B] += (disp[k * D + A] - m.mean[A]) * (disp[k * D + B] - m.mean[B]);
    for (double& v : m.covariance) v /= static_cast<double>(K - 1);
  }
  for (std::size_t A = 0; A < D; ++A) m.variance[A] = m.covariance[A * D + A];
  return m;
}

/// Walkers drawn from an isotropic Gaussian (per axis sigma) around `center`.
inline Ensemble sample_gaussian(SpecPtr spec, const ConfigPoint& center, std::span<const double> sigma,
                                std::size_t walkers, std::uint64_t seed) {
  Ensemble e{spec, std::vector<double>(walkers * static_cast<std::size_t>(spec->config_dim())), seed, 0.0, 0};
  const std::size_t D = e.dim();
  for (std::size_t k = 0; k < walkers; ++k) {
    CounterRng rng(seed, k, ~std::uint64_t{0});
    for (std::size_t A = 0; A < D; ++A)
      e.positions[k * D + A] =
          wrap_coordinate(center.coordinates[A] + sigma[A] * rng.normal(), spec->length_of_axis(static_cast<int>(A)));
  }
  return e;
}

/// Walkers drawn from a grid density: a cell with probability rho_i dV, then
/// a uniform position inside the cell.
inline Ensemble sample_density(const ScalarField& rho, std::size_t walkers, std::uint64_t seed) {
  const auto& spec = rho.spec();
  std::vector<double> cdf(rho.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    acc += std::max(rho[i], 0.0);
    cdf[i] = acc;
  }
  if (!(acc > 0.0)) throw DomainError("sample_density: density has no mass");
  GridIndexer grid(spec);
  Ensemble e{rho.spec_ptr(), std::vector<double>(walkers * static_cast<std::size_t>(spec.config_dim())), seed, 0.0, 0};
  const std::size_t D = e.dim();
  for (std::size_t k = 0; k < walkers; ++k) {
    CounterRng rng(seed, k, ~std::uint64_t{0});
    const double u = rng.uniform() * acc;
    std::size_t cell = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    cell = std::min(cell, rho.size() - 1);
    for (std::size_t A = 0; A < D; ++A) {
      const int axis = static_cast<int>(A);
      const double x = (grid.index_on_axis(cell, axis) + rng.uniform() - 0.5) * spec.spacing(axis);
      e.positions[k * D + A] = wrap_coordinate(x, spec.length_of_axis(axis));
    }
  }
  return e;
}

}  // namespace red
