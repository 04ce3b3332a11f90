#include "madelung/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "madelung/error.hpp"

namespace madelung {

namespace {

bool is_finite(double v) { return std::isfinite(v); }
bool is_finite(const std::complex<double>& v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}

[[noreturn]] void precondition(const std::string& msg) { throw Error("precondition", msg); }

}  // namespace

Grid1D::Grid1D(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max), n_(n) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
    precondition("grid requires finite x_min < x_max");
  if (n < 3) precondition("grid requires at least 3 points");
  h_ = (x_max - x_min) / static_cast<double>(n - 1);
}

std::vector<double> Grid1D::coordinates() const {
  std::vector<double> xs(n_);
  for (std::size_t i = 0; i < n_; ++i) xs[i] = (*this)[i];
  return xs;
}

std::size_t Grid1D::nearest(double x) const noexcept {
  const double s = std::round((x - x_min_) / h_);
  if (!(s > 0)) return 0;
  if (s >= static_cast<double>(n_ - 1)) return n_ - 1;
  return static_cast<std::size_t>(s);
}

std::size_t Grid1D::cell(double x) const noexcept {
  const double s = std::floor((x - x_min_) / h_);
  if (!(s > 0)) return 0;
  if (s >= static_cast<double>(n_ - 2)) return n_ - 2;
  return static_cast<std::size_t>(s);
}

Grid::Grid(Grid1D x) : axes_{x} {}
Grid::Grid(Grid1D x, Grid1D y) : axes_{x, y} {}

std::size_t Grid::size() const noexcept {
  std::size_t n = 1;
  for (const auto& a : axes_) n *= a.size();
  return n;
}

std::array<std::size_t, 2> Grid::point(std::size_t flat) const noexcept {
  if (dims() == 1) return {flat, 0};
  const std::size_t ny = axes_[1].size();
  return {flat / ny, flat % ny};
}

std::array<double, 2> Grid::position(std::size_t flat) const noexcept {
  const auto [i, j] = point(flat);
  return {axes_[0][i], dims() == 1 ? 0.0 : axes_[1][j]};
}

double Grid::min_spacing() const noexcept {
  double h = axes_[0].spacing();
  for (const auto& a : axes_) h = std::min(h, a.spacing());
  return h;
}

template <typename T>
Field<T>::Field(Grid grid, std::vector<T> values)
    : Field(std::move(grid), std::move(values), Mask{}) {}

template <typename T>
Field<T>::Field(Grid grid, std::vector<T> values, Mask valid)
    : grid_(std::move(grid)), values_(std::move(values)), valid_(std::move(valid)) {
  if (values_.size() != grid_.size())
    precondition("field has " + std::to_string(values_.size()) + " values for a grid of " +
                 std::to_string(grid_.size()) + " points");
  if (valid_.empty()) valid_.assign(values_.size(), 1);
  if (valid_.size() != values_.size()) precondition("mask size does not match field size");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (valid_[i] && !is_finite(values_[i]))
      precondition("non-finite field value at valid index " + std::to_string(i));
}

template <typename T>
bool Field<T>::all_valid() const noexcept {
  return std::all_of(valid_.begin(), valid_.end(), [](std::uint8_t v) { return v != 0; });
}

template class Field<double>;
template class Field<std::complex<double>>;

std::vector<double> quadrature_weights(const Grid1D& axis) {
  const std::size_t n = axis.size();
  const double h = axis.spacing();
  std::vector<double> w(n, h);
  if (n % 2 == 1) {
    for (std::size_t i = 1; i + 1 < n; ++i) w[i] = (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
    w.front() = w.back() = h / 3.0;
  } else {
    w.front() = w.back() = 0.5 * h;
  }
  return w;
}

std::vector<double> quadrature_weights(const Grid& grid) {
  auto wx = quadrature_weights(grid.axis(0));
  if (grid.dims() == 1) return wx;
  const auto wy = quadrature_weights(grid.axis(1));
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < wx.size(); ++i)
    for (std::size_t j = 0; j < wy.size(); ++j) w[grid.index(i, j)] = wx[i] * wy[j];
  return w;
}

std::vector<double> trapezoid_weights(const Grid& grid) {
  auto axis = [](const Grid1D& a) {
    std::vector<double> w(a.size(), a.spacing());
    w.front() = w.back() = 0.5 * a.spacing();
    return w;
  };
  auto wx = axis(grid.axis(0));
  if (grid.dims() == 1) return wx;
  const auto wy = axis(grid.axis(1));
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < wx.size(); ++i)
    for (std::size_t j = 0; j < wy.size(); ++j) w[grid.index(i, j)] = wx[i] * wy[j];
  return w;
}

double integrate_trapezoid(const ScalarField& f) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!f.valid(i) || !std::isfinite(f[i]))
      precondition("integrate_trapezoid: masked or non-finite value at index " + std::to_string(i));
  const auto w = trapezoid_weights(f.grid());
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += w[i] * f[i];
  return sum;
}

double integrate(const ScalarField& f) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!f.valid(i)) precondition("integrate: masked point at index " + std::to_string(i));
    if (!std::isfinite(f[i]))
      precondition("integrate: non-finite value at index " + std::to_string(i));
  }
  const auto w = quadrature_weights(f.grid());
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += w[i] * f[i];
  return sum;
}

double integrate_masked(const ScalarField& f) {
  const auto w = quadrature_weights(f.grid());
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.valid(i)) sum += w[i] * f[i];
  return sum;
}

namespace {

// Strided view of one grid line along an axis: element k lives at
// base + k * stride in the flat array.
struct Line {
  std::size_t base;
  std::size_t stride;
  std::size_t n;
};

template <typename F>
void for_each_line(const Grid& g, std::size_t axis, F&& fn) {
  if (g.dims() == 1) {
    fn(Line{0, 1, g.extent(0)});
    return;
  }
  const std::size_t nx = g.extent(0), ny = g.extent(1);
  if (axis == 0) {
    for (std::size_t j = 0; j < ny; ++j) fn(Line{j, ny, nx});
  } else {
    for (std::size_t i = 0; i < nx; ++i) fn(Line{i * ny, 1, ny});
  }
}

template <typename T>
void second_difference(const std::vector<T>& v, const Mask& m, const Line& ln, double h,
                       EdgeRule rule, std::vector<T>& out, Mask& mout, bool accumulate) {
  const double inv = 1.0 / (h * h);
  auto at = [&](std::size_t k) { return v[ln.base + k * ln.stride]; };
  auto ok = [&](std::size_t k) { return m[ln.base + k * ln.stride] != 0; };
  const std::size_t n = ln.n;
  for (std::size_t k = 0; k < n; ++k) {
    T d{};
    bool valid = true;
    if (k > 0 && k + 1 < n) {
      d = (at(k - 1) - 2.0 * at(k) + at(k + 1)) * inv;
      valid = ok(k - 1) && ok(k) && ok(k + 1);
    } else {
      const bool left = k == 0;
      auto e = [&](std::size_t off) { return left ? off : n - 1 - off; };
      if (rule == EdgeRule::EvenReflection) {
        d = 2.0 * (at(e(1)) - at(e(0))) * inv;
        valid = ok(e(0)) && ok(e(1));
      } else if (n >= 4) {
        d = (2.0 * at(e(0)) - 5.0 * at(e(1)) + 4.0 * at(e(2)) - at(e(3))) * inv;
        valid = ok(e(0)) && ok(e(1)) && ok(e(2)) && ok(e(3));
      } else {
        d = (at(0) - 2.0 * at(1) + at(2)) * inv;
        valid = ok(0) && ok(1) && ok(2);
      }
    }
    const std::size_t idx = ln.base + k * ln.stride;
    if (accumulate) {
      out[idx] += d;
      mout[idx] = mout[idx] && valid;
    } else {
      out[idx] = d;
      mout[idx] = valid;
    }
  }
}

}  // namespace

template <typename T>
Field<T> gradient(const Field<T>& f, std::size_t axis) {
  const Grid& g = f.grid();
  if (axis >= g.dims()) precondition("gradient: axis out of range");
  const double h = g.axis(axis).spacing();
  std::vector<T> v(f.values().begin(), f.values().end());
  const Mask& m = f.mask();
  std::vector<T> out(v.size());
  Mask mout(v.size(), 0);
  for_each_line(g, axis, [&](const Line& ln) {
    auto at = [&](std::size_t k) { return v[ln.base + k * ln.stride]; };
    auto ok = [&](std::size_t k) { return m[ln.base + k * ln.stride] != 0; };
    const std::size_t n = ln.n;
    for (std::size_t k = 0; k < n; ++k) {
      T d{};
      bool valid;
      if (k == 0) {
        d = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
        valid = ok(0) && ok(1) && ok(2);
      } else if (k + 1 == n) {
        d = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
        valid = ok(n - 1) && ok(n - 2) && ok(n - 3);
      } else {
        d = (at(k + 1) - at(k - 1)) / (2.0 * h);
        valid = ok(k - 1) && ok(k + 1);
      }
      const std::size_t idx = ln.base + k * ln.stride;
      out[idx] = valid ? d : T{};
      mout[idx] = valid;
    }
  });
  return Field<T>(g, std::move(out), std::move(mout));
}

template <typename T>
Field<T> laplacian(const Field<T>& f, EdgeRule rule) {
  const Grid& g = f.grid();
  std::vector<T> v(f.values().begin(), f.values().end());
  std::vector<T> out(v.size());
  Mask mout(v.size(), 1);
  for (std::size_t d = 0; d < g.dims(); ++d) {
    const double h = g.axis(d).spacing();
    for_each_line(g, d, [&](const Line& ln) {
      second_difference(v, f.mask(), ln, h, rule, out, mout, d > 0);
    });
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!mout[i]) out[i] = T{};
  return Field<T>(g, std::move(out), std::move(mout));
}

template Field<double> gradient(const Field<double>&, std::size_t);
template Field<std::complex<double>> gradient(const Field<std::complex<double>>&, std::size_t);
template Field<double> laplacian(const Field<double>&, EdgeRule);
template Field<std::complex<double>> laplacian(const Field<std::complex<double>>&, EdgeRule);

CubicStencil cubic_stencil(const Grid1D& axis, double x) {
  const std::size_t n = axis.size();
  if (n < 4) precondition("cubic interpolation needs at least 4 grid points");
  const std::size_t cell = axis.cell(x);
  const std::size_t first = std::clamp<std::size_t>(cell == 0 ? 0 : cell - 1, 0, n - 4);
  const double h = axis.spacing();
  // t measured from the second stencil node, so nodes sit at t = -1, 0, 1, 2
  const double t = (x - axis[first + 1]) / h;
  CubicStencil s{first, {}, {}};
  s.value = {-t * (t - 1) * (t - 2) / 6, (t + 1) * (t - 1) * (t - 2) / 2,
             -(t + 1) * t * (t - 2) / 2, (t + 1) * t * (t - 1) / 6};
  s.slope = {-(3 * t * t - 6 * t + 2) / (6 * h), (3 * t * t - 4 * t - 1) / (2 * h),
             -(3 * t * t - 2 * t - 2) / (2 * h), (3 * t * t - 1) / (6 * h)};
  return s;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace {

template <typename T>
void write_field_csv(std::ostream& out, const Field<T>& f, bool complex_values) {
  const Grid& g = f.grid();
  const bool two_d = g.dims() == 2;
  out << (two_d ? "x,y," : "x,") << (complex_values ? "re,im," : "re,") << "mask\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto p = g.position(i);
    out << format_number(p[0]) << ',';
    if (two_d) out << format_number(p[1]) << ',';
    if constexpr (std::is_same_v<T, double>) {
      out << format_number(f.valid(i) ? f[i] : std::nan(""));
    } else {
      const auto z = f.valid(i) ? f[i] : std::complex<double>(std::nan(""), std::nan(""));
      out << format_number(z.real()) << ',' << format_number(z.imag());
    }
    out << ',' << (f.valid(i) ? 1 : 0) << '\n';
  }
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error("parse", "bad number in CSV: '" + s + "'");
  return v;
}

}  // namespace

void write_csv(std::ostream& out, const ScalarField& f) { write_field_csv(out, f, false); }
void write_csv(std::ostream& out, const ComplexField& f) { write_field_csv(out, f, true); }

ScalarField read_scalar_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "x,re,mask")
    throw Error("parse", "expected header 'x,re,mask'");
  std::vector<double> xs, vs;
  Mask mask;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
      throw Error("parse", "malformed CSV row: '" + line + "'");
    xs.push_back(parse_number(a));
    vs.push_back(parse_number(b));
    mask.push_back(c == "1" ? 1 : 0);
  }
  if (xs.size() < 3) throw Error("parse", "CSV field needs at least 3 rows");
  Grid1D axis(xs.front(), xs.back(), xs.size());
  for (std::size_t i = 0; i < vs.size(); ++i)
    if (!mask[i]) vs[i] = 0.0;
  return ScalarField(Grid(axis), std::move(vs), std::move(mask));
}

}  // namespace madelung
