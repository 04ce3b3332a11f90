#pragma once

// Uniform grids, fields sampled on them, quadrature and finite-difference
// operators. Everything downstream works in natural units (hbar = m = 1).

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace madelung {

/// Uniformly spaced points x_min = x_0 < x_1 < ... < x_{n-1} = x_max.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t n);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }

  /// Coordinate of point i; the last point is exactly x_max.
  double operator[](std::size_t i) const noexcept {
    return i + 1 == n_ ? x_max_ : x_min_ + static_cast<double>(i) * h_;
  }
  std::vector<double> coordinates() const;

  /// Closest grid index (clamped to the grid).
  std::size_t nearest(double x) const noexcept;
  /// Cell index i with x in [x_i, x_{i+1}], clamped to [0, n-2].
  std::size_t cell(double x) const noexcept;
  bool contains(double x) const noexcept { return x >= x_min_ && x <= x_max_; }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double h_;
};

/// One- or two-dimensional tensor-product grid. Flat index of (i, j) is
/// i * ny + j, so x is the slow axis.
class Grid {
 public:
  explicit Grid(Grid1D x);
  Grid(Grid1D x, Grid1D y);

  std::size_t dims() const noexcept { return axes_.size(); }
  const Grid1D& axis(std::size_t d) const { return axes_.at(d); }
  std::size_t size() const noexcept;
  std::size_t extent(std::size_t d) const { return axes_.at(d).size(); }

  std::size_t index(std::size_t i, std::size_t j = 0) const noexcept {
    return dims() == 1 ? i : i * axes_[1].size() + j;
  }
  /// (i, j) for a flat index; j = 0 in 1D.
  std::array<std::size_t, 2> point(std::size_t flat) const noexcept;
  /// Physical coordinates of a flat index; second entry is 0 in 1D.
  std::array<double, 2> position(std::size_t flat) const noexcept;
  /// Smallest grid spacing over all axes.
  double min_spacing() const noexcept;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::vector<Grid1D> axes_;
};

/// Per-point validity flags (1 = valid).
using Mask = std::vector<std::uint8_t>;

/// Values sampled on a grid with a validity mask. Immutable after
/// construction; values must be finite wherever the mask is set.
template <typename T>
class Field {
 public:
  using value_type = T;

  Field(Grid grid, std::vector<T> values);
  Field(Grid grid, std::vector<T> values, Mask valid);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const T> values() const noexcept { return values_; }
  const T& operator[](std::size_t i) const noexcept { return values_[i]; }
  const Mask& mask() const noexcept { return valid_; }
  bool valid(std::size_t i) const noexcept { return valid_[i] != 0; }
  bool all_valid() const noexcept;

 private:
  Grid grid_;
  std::vector<T> values_;
  Mask valid_;
};

using ScalarField = Field<double>;
using ComplexField = Field<std::complex<double>>;

extern template class Field<double>;
extern template class Field<std::complex<double>>;

/// Boundary treatment of the second-derivative stencil.
enum class EdgeRule {
  /// Second-order one-sided stencil (2f0 - 5f1 + 4f2 - f3) / h^2.
  OneSided,
  /// Ghost point f_{-1} = f_1, i.e. the field is even about the boundary
  /// (zero normal derivative). With trapezoid weights the integral of the
  /// resulting Laplacian telescopes to zero.
  EvenReflection,
};

/// Composite Simpson weights for odd n, trapezoid weights for even n.
std::vector<double> quadrature_weights(const Grid1D& axis);
/// Tensor product of the per-axis weights.
std::vector<double> quadrature_weights(const Grid& grid);

/// Trapezoid weights on every axis. Sums of central differences telescope
/// against these, which matters for fields with jumps (step potentials).
std::vector<double> trapezoid_weights(const Grid& grid);
double integrate_trapezoid(const ScalarField& f);

/// Quadrature of a fully valid field. Throws on masked points and on
/// non-finite values (naming the first offending index).
double integrate(const ScalarField& f);
/// Same rule, with masked points contributing zero.
double integrate_masked(const ScalarField& f);

/// Central differences inside, second-order one-sided at the edges. A point
/// of the result is valid only if every stencil input is valid.
template <typename T>
Field<T> gradient(const Field<T>& f, std::size_t axis = 0);

/// 3-point (1D) / 5-point (2D) Laplacian.
template <typename T>
Field<T> laplacian(const Field<T>& f, EdgeRule rule = EdgeRule::OneSided);

/// 4-point Lagrange interpolation on x_{first}..x_{first+3}: f(x) is
/// sum value[k] * f[first + k] and f'(x) is sum slope[k] * f[first + k].
/// The stencil is centred on the cell holding x and clamped at the ends.
struct CubicStencil {
  std::size_t first;
  std::array<double, 4> value;
  std::array<double, 4> slope;
};
CubicStencil cubic_stencil(const Grid1D& axis, double x);

/// Shortest decimal representation that round-trips ("nan"/"inf" spelled out).
std::string format_number(double v);

/// CSV with header `x[,y],re[,im],mask`, one row per point in flat order.
void write_csv(std::ostream& out, const ScalarField& f);
void write_csv(std::ostream& out, const ComplexField& f);
/// Reads a 1D real field written by write_csv.
ScalarField read_scalar_csv(std::istream& in);

}  // namespace madelung
