#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "red/error.hpp"
#include "red/spec.hpp"

namespace red {

/// A point of configuration space, coordinates indexed by A = n * spatial_dim + a.
struct ConfigPoint {
  std::vector<double> coordinates;
};

/// Global translation rate, one component per spatial axis. Lifting to
/// configuration space repeats the same component for every particle.
struct ShiftVelocity {
  std::vector<double> components;

  static ShiftVelocity zero(const SystemSpec& spec) {
    return {std::vector<double>(static_cast<std::size_t>(spec.spatial_dim), 0.0)};
  }

  double on_axis(const SystemSpec& spec, int axis) const {
    return components[static_cast<std::size_t>(spec.spatial_axis_of(axis))];
  }

  void check(const SystemSpec& spec) const {
    if (components.size() != static_cast<std::size_t>(spec.spatial_dim))
      throw ShapeError(detail::concat("shift velocity has ", components.size(), " components, spatial_dim is ",
                                      spec.spatial_dim));
  }
};

/// Reduces every coordinate into [0, L) for its axis.
inline double wrap_coordinate(double x, double length) {
  double r = x - length * std::floor(x / length);
  if (r >= length) r -= length;
  if (r < 0.0) r = 0.0;
  return r;
}

inline ConfigPoint wrap(const ConfigPoint& x, const SystemSpec& spec) {
  ConfigPoint out = x;
  for (std::size_t A = 0; A < out.coordinates.size(); ++A)
    out.coordinates[A] = wrap_coordinate(out.coordinates[A], spec.length_of_axis(static_cast<int>(A)));
  return out;
}

/// Displacement b - a under the minimal-image convention of a periodic axis.
inline double minimal_image(double delta, double length) {
  return delta - length * std::nearbyint(delta / length);
}

/// Row-major flat <-> multi-index conversion; axis 0 varies slowest.
class GridIndexer {
 public:
  explicit GridIndexer(const SystemSpec& spec) : shape_(spec.grid_points), strides_(shape_.size()) {
    std::size_t s = 1;
    for (std::size_t A = shape_.size(); A-- > 0;) {
      strides_[A] = s;
      s *= static_cast<std::size_t>(shape_[A]);
    }
    total_ = s;
  }

  std::size_t size() const { return total_; }
  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
  int extent(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
  int rank() const { return static_cast<int>(shape_.size()); }

  int index_on_axis(std::size_t flat, int axis) const {
    return static_cast<int>((flat / strides_[static_cast<std::size_t>(axis)]) %
                            static_cast<std::size_t>(shape_[static_cast<std::size_t>(axis)]));
  }

  std::vector<int> multi(std::size_t flat) const {
    std::vector<int> idx(shape_.size());
    for (int A = 0; A < rank(); ++A) idx[static_cast<std::size_t>(A)] = index_on_axis(flat, A);
    return idx;
  }

  std::size_t flat(std::span<const int> idx) const {
    std::size_t f = 0;
    for (std::size_t A = 0; A < shape_.size(); ++A) {
      int n = shape_[A];
      int i = ((idx[A] % n) + n) % n;
      f += static_cast<std::size_t>(i) * strides_[A];
    }
    return f;
  }

 private:
  std::vector<int> shape_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 1;
};

/// Coordinates of the grid node with the given flat index (x^A = i_A h_A).
inline void node_coordinates(const SystemSpec& spec, const GridIndexer& grid, std::size_t flat, std::span<double> x) {
  for (int A = 0; A < grid.rank(); ++A) x[static_cast<std::size_t>(A)] = grid.index_on_axis(flat, A) * spec.spacing(A);
}

/// Real values on the uniform periodic grid of a SystemSpec.
class ScalarField {
 public:
  explicit ScalarField(SpecPtr spec, double fill = 0.0)
      : spec_(std::move(spec)), values_(spec_->cell_count(), fill) {}

  ScalarField(SpecPtr spec, std::vector<double> values) : spec_(std::move(spec)), values_(std::move(values)) {
    if (values_.size() != spec_->cell_count())
      throw ShapeError(detail::concat("field has ", values_.size(), " values, grid ",
                                      detail::join(spec_->grid_points), " needs ", spec_->cell_count()));
  }

  /// Samples f at every grid node.
  static ScalarField from_function(SpecPtr spec, const std::function<double(std::span<const double>)>& f) {
    ScalarField out(spec);
    GridIndexer grid(*spec);
    std::vector<double> x(static_cast<std::size_t>(spec->config_dim()));
    for (std::size_t i = 0; i < out.size(); ++i) {
      node_coordinates(*spec, grid, i, x);
      out.values_[i] = f(x);
    }
    return out;
  }

  const SystemSpec& spec() const { return *spec_; }
  const SpecPtr& spec_ptr() const { return spec_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<int>& shape() const { return spec_->grid_points; }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }

  ScalarField& operator+=(const ScalarField& o) {
    same_shape(o);
    for (std::size_t i = 0; i < size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    same_shape(o);
    for (std::size_t i = 0; i < size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  ScalarField& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
  friend ScalarField operator*(ScalarField a, double s) { return a *= s; }

  void same_shape(const ScalarField& o) const {
    if (o.values_.size() != values_.size() || o.shape() != shape())
      throw ShapeError(detail::concat("field shapes differ: ", detail::join(shape()), " vs ", detail::join(o.shape())));
  }

 private:
  SpecPtr spec_;
  std::vector<double> values_;
};

namespace detail {

/// Neumaier-compensated sum in index order.
inline double stable_sum(std::span<const double> v) {
  double sum = 0.0, c = 0.0;
  for (double x : v) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  return sum + c;
}

}  // namespace detail

/// Rectangle rule on the periodic grid: sum of values times cell volume.
inline double quadrature(const SystemSpec& spec, std::span<const double> values) {
  if (values.size() != spec.cell_count())
    throw ShapeError(detail::concat("quadrature: grid ", detail::join(spec.grid_points), " has ", spec.cell_count(),
                                    " cells, field has ", values.size(), " values"));
  return detail::stable_sum(values) * spec.volume() / static_cast<double>(spec.cell_count());
}

inline double quadrature(const ScalarField& f) { return quadrature(f.spec(), f.values()); }

/// Pointwise product; both fields must share a grid.
inline ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  a.same_shape(b);
  ScalarField out(a.spec_ptr());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

/// Circular shift by whole cells: out(i) = f(i - offset).
inline ScalarField circular_shift(const ScalarField& f, std::span<const int> offset) {
  GridIndexer grid(f.spec());
  ScalarField out(f.spec_ptr());
  std::vector<int> idx;
  for (std::size_t i = 0; i < f.size(); ++i) {
    idx = grid.multi(i);
    for (std::size_t A = 0; A < idx.size(); ++A) idx[A] += offset[A];
    out[grid.flat(idx)] = f[i];
  }
  return out;
}

}  // namespace red
