#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "red/field.hpp"

// Fourier machinery on the periodic grid. Transforms are unnormalized forward
// and 1/N-normalized inverse, so inverse(forward(f)) == f.

namespace red::spectral {

using Complex = std::complex<double>;

namespace detail {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// FFTW's planner is not thread-safe; execution of an existing plan on new
// arrays is. Plans live for the whole process.
inline const PlanPair& plans_for(const std::vector<int>& shape) {
  static std::mutex mutex;
  static std::map<std::vector<int>, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(shape);
  if (it != cache.end()) return it->second;
  std::size_t n = 1;
  for (int s : shape) n *= static_cast<std::size_t>(s);
  auto* scratch = fftw_alloc_complex(n);
  PlanPair p;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.forward = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), scratch, scratch, FFTW_FORWARD, flags);
  p.backward = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), scratch, scratch, FFTW_BACKWARD, flags);
  fftw_free(scratch);
  return cache.emplace(shape, p).first->second;
}

inline fftw_complex* as_fftw(std::vector<Complex>& v) { return reinterpret_cast<fftw_complex*>(v.data()); }

}  // namespace detail

inline void forward(std::vector<Complex>& data, const std::vector<int>& shape) {
  fftw_execute_dft(detail::plans_for(shape).forward, detail::as_fftw(data), detail::as_fftw(data));
}

inline void inverse(std::vector<Complex>& data, const std::vector<int>& shape) {
  fftw_execute_dft(detail::plans_for(shape).backward, detail::as_fftw(data), detail::as_fftw(data));
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& c : data) c *= scale;
}

/// Angular wavenumbers of one axis in FFT order. With `zero_nyquist` the
/// unpaired Nyquist mode of an even grid gets k = 0 (first derivatives);
/// otherwise it gets -pi/h (second derivatives, kinetic energy).
inline std::vector<double> wavenumbers(const SystemSpec& spec, int axis, bool zero_nyquist) {
  const int n = spec.grid_points[static_cast<std::size_t>(axis)];
  const double base = 2.0 * std::numbers::pi / spec.length_of_axis(axis);
  std::vector<double> k(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    int m = (2 * j < n) ? j : j - n;
    if (zero_nyquist && n % 2 == 0 && 2 * j == n) m = 0;
    k[static_cast<std::size_t>(j)] = base * m;
  }
  return k;
}

/// Per-cell wavenumber of `axis` laid out over the flat spectrum.
inline std::vector<double> flat_wavenumbers(const SystemSpec& spec, int axis, bool zero_nyquist) {
  GridIndexer grid(spec);
  auto k1 = wavenumbers(spec, axis, zero_nyquist);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = k1[static_cast<std::size_t>(grid.index_on_axis(i, axis))];
  return out;
}

inline std::vector<Complex> to_complex(std::span<const double> v) {
  std::vector<Complex> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = Complex(v[i], 0.0);
  return out;
}

/// d/dx_axis of complex grid data (spectral).
inline std::vector<Complex> derivative(std::span<const Complex> values, const SystemSpec& spec, int axis) {
  std::vector<Complex> work(values.begin(), values.end());
  forward(work, spec.grid_points);
  auto k = flat_wavenumbers(spec, axis, true);
  for (std::size_t i = 0; i < work.size(); ++i) work[i] *= Complex(0.0, k[i]);
  inverse(work, spec.grid_points);
  return work;
}

/// Gradient of complex grid data, one array per configuration axis.
inline std::vector<std::vector<Complex>> gradient(std::span<const Complex> values, const SystemSpec& spec) {
  std::vector<Complex> hat(values.begin(), values.end());
  forward(hat, spec.grid_points);
  std::vector<std::vector<Complex>> out;
  for (int A = 0; A < spec.config_dim(); ++A) {
    auto k = flat_wavenumbers(spec, A, true);
    std::vector<Complex> d(hat.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = hat[i] * Complex(0.0, k[i]);
    inverse(d, spec.grid_points);
    out.push_back(std::move(d));
  }
  return out;
}

namespace detail {

inline void require_finite(const ScalarField& f, const char* what) {
  if (!f.all_finite()) throw NumericalError(std::string(what) + ": field contains non-finite values");
}

}  // namespace detail

/// Spectral gradient of a periodic real field; one field per configuration axis.
inline std::vector<ScalarField> gradient(const ScalarField& f) {
  detail::require_finite(f, "gradient");
  const auto& spec = f.spec();
  auto hat = to_complex(f.values());
  forward(hat, spec.grid_points);
  std::vector<ScalarField> out;
  out.reserve(static_cast<std::size_t>(spec.config_dim()));
  std::vector<Complex> d(hat.size());
  for (int A = 0; A < spec.config_dim(); ++A) {
    auto k = flat_wavenumbers(spec, A, true);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = hat[i] * Complex(0.0, k[i]);
    inverse(d, spec.grid_points);
    ScalarField g(f.spec_ptr());
    for (std::size_t i = 0; i < d.size(); ++i) g[i] = d[i].real();
    out.push_back(std::move(g));
  }
  return out;
}

/// Spectral d^2/dx_axis^2.
inline ScalarField second_derivative(const ScalarField& f, int axis) {
  detail::require_finite(f, "second_derivative");
  const auto& spec = f.spec();
  auto hat = to_complex(f.values());
  forward(hat, spec.grid_points);
  auto k = flat_wavenumbers(spec, axis, false);
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= -k[i] * k[i];
  inverse(hat, spec.grid_points);
  ScalarField out(f.spec_ptr());
  for (std::size_t i = 0; i < hat.size(); ++i) out[i] = hat[i].real();
  return out;
}

/// Sum over axes of d/dx_A of flux[A]; the k = 0 mode is exactly zero.
inline ScalarField divergence(std::span<const ScalarField> flux) {
  const auto& spec = flux.front().spec();
  std::vector<Complex> acc(spec.cell_count(), Complex{});
  for (int A = 0; A < spec.config_dim(); ++A) {
    const auto& fa = flux[static_cast<std::size_t>(A)];
    detail::require_finite(fa, "divergence");
    auto hat = to_complex(fa.values());
    forward(hat, spec.grid_points);
    auto k = flat_wavenumbers(spec, A, true);
    for (std::size_t i = 0; i < hat.size(); ++i) acc[i] += hat[i] * Complex(0.0, k[i]);
  }
  acc[0] = Complex{};
  inverse(acc, spec.grid_points);
  ScalarField out(flux.front().spec_ptr());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i].real();
  return out;
}

}  // namespace red::spectral

namespace red {
using spectral::gradient;
}
