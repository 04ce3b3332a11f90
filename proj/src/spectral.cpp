#include "madelung/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "madelung/error.hpp"

namespace madelung {

namespace {

using std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void precondition(const std::string& msg) { throw Error("precondition", msg); }

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xF];
  return s;
}

void require_well_grid(double a, const Grid1D& grid) {
  const double tol = 1e-12 * std::max(1.0, a);
  if (std::abs(grid.x_min() + a) > tol || std::abs(grid.x_max() - a) > tol)
    precondition("grid [" + format_number(grid.x_min()) + ", " + format_number(grid.x_max()) +
                 "] does not match the well [-" + format_number(a) + ", " + format_number(a) + "]");
}

// Makes the first component above 1e-8 of the maximum positive.
void apply_sign_convention(std::vector<double>& v) {
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  for (double x : v) {
    if (std::abs(x) > 1e-8 * peak) {
      if (x < 0)
        for (double& y : v) y = -y;
      return;
    }
  }
}

double hermite_function(int n, double xi, double* prev_out = nullptr) {
  // Normalized Hermite functions in xi via the stable three-term recurrence.
  double p0 = std::pow(pi, -0.25) * std::exp(-0.5 * xi * xi);
  double pm = 0.0;
  for (int k = 0; k < n; ++k) {
    const double next =
        std::sqrt(2.0 / (k + 1)) * xi * p0 - std::sqrt(static_cast<double>(k) / (k + 1)) * pm;
    pm = p0;
    p0 = next;
  }
  if (prev_out) *prev_out = pm;
  return p0;
}

// Oscillator state n and its x-derivative, in the basis sign convention.
std::pair<double, double> harmonic_point(int n, double omega, double x) {
  const double s = std::sqrt(omega);
  const double xi = s * x;
  double prev = 0.0;
  const double phi = hermite_function(n, xi, &prev);
  const double next = hermite_function(n + 1, xi);
  const double scale = std::pow(omega, 0.25) * ((n % 2) ? -1.0 : 1.0);
  const double dphi = s * (std::sqrt(n / 2.0) * prev - std::sqrt((n + 1) / 2.0) * next);
  return {scale * phi, scale * dphi};
}

PointValue box_point(const std::array<int, 2>& lab, const EigenBasis::Analytic& an, double x, double y) {
  const double kx = lab[0] * pi / an.length[0];
  const double ky = lab[1] * pi / an.length[1];
  const double norm = 2.0 / std::sqrt(an.length[0] * an.length[1]);
  const double sx = std::sin(kx * (x - an.origin[0])), cx = std::cos(kx * (x - an.origin[0]));
  const double sy = std::sin(ky * (y - an.origin[1])), cy = std::cos(ky * (y - an.origin[1]));
  PointValue pv;
  pv.value = norm * sx * sy;
  pv.grad = {norm * kx * cx * sy, norm * ky * sx * cy};
  return pv;
}

}  // namespace

double potential_value(const Potential& p, double x) {
  return std::visit(
      overloaded{
          [](const InfiniteWell&) { return 0.0; },
          [x](const WellWithBarrier& b) { return std::abs(x) <= 0.5 * b.width ? b.height : 0.0; },
          [x](const Harmonic& h) { return 0.5 * h.omega * h.omega * x * x; },
          [x](const QuarticDoubleWell&) {
            const double x2 = x * x;
            return 240.0 * x2 * x2 - 120.0 * x2 + 15.0;
          },
          [x](const Tabulated& t) {
            if (t.x.size() < 2) precondition("tabulated potential needs at least 2 samples");
            if (x <= t.x.front()) return t.u.front();
            if (x >= t.x.back()) return t.u.back();
            const auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
            const std::size_t j = static_cast<std::size_t>(it - t.x.begin());
            const double w = (x - t.x[j - 1]) / (t.x[j] - t.x[j - 1]);
            return (1 - w) * t.u[j - 1] + w * t.u[j];
          },
      },
      p);
}

std::string potential_kind(const Potential& p) {
  return std::visit(overloaded{
                        [](const InfiniteWell&) { return std::string("infinite_well"); },
                        [](const WellWithBarrier&) { return std::string("well_with_barrier"); },
                        [](const Harmonic&) { return std::string("harmonic"); },
                        [](const QuarticDoubleWell&) { return std::string("quartic_double_well"); },
                        [](const Tabulated&) { return std::string("tabulated"); },
                    },
                    p);
}

std::string describe(const Potential& p) {
  return std::visit(
      overloaded{
          [](const InfiniteWell& w) { return "infinite_well(half_width=" + format_number(w.half_width) + ")"; },
          [](const WellWithBarrier& b) {
            return "well_with_barrier(half_width=" + format_number(b.half_width) +
                   ",height=" + format_number(b.height) + ",width=" + format_number(b.width) + ")";
          },
          [](const Harmonic& h) { return "harmonic(omega=" + format_number(h.omega) + ")"; },
          [](const QuarticDoubleWell&) { return std::string("quartic_double_well()"); },
          [](const Tabulated& t) {
            std::string all;
            for (std::size_t i = 0; i < t.x.size(); ++i)
              all += format_number(t.x[i]) + ":" + format_number(t.u[i]) + ";";
            return "tabulated(samples=" + std::to_string(t.x.size()) + ",hash=" + hex(fnv1a(all)) + ")";
          },
      },
      p);
}

BarrierSnap snap_barrier(const WellWithBarrier& b, const Grid1D& grid) {
  if (!(b.width > 0)) precondition("barrier width must be positive");
  const std::size_t first = grid.nearest(-0.5 * b.width);
  const std::size_t last = grid.nearest(0.5 * b.width);
  return {first, last, grid[last] - grid[first]};
}

ScalarField sample_potential(const Potential& p, const Grid1D& grid) {
  std::vector<double> u(grid.size(), 0.0);
  if (const auto* w = std::get_if<InfiniteWell>(&p)) {
    require_well_grid(w->half_width, grid);
  } else if (const auto* b = std::get_if<WellWithBarrier>(&p)) {
    require_well_grid(b->half_width, grid);
    const auto snap = snap_barrier(*b, grid);
    for (std::size_t i = snap.first; i <= snap.last; ++i) u[i] = b->height;
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) u[i] = potential_value(p, grid[i]);
  }
  for (std::size_t i = 1; i + 1 < u.size(); ++i)
    if (!std::isfinite(u[i])) precondition("potential is not finite at grid index " + std::to_string(i));
  return ScalarField(Grid(grid), std::move(u));
}

std::vector<double> SymTridiag::apply(std::span<const double> x) const {
  const std::size_t n = size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diagonal[i] * x[i];
    if (i > 0) s += off_diagonal[i - 1] * x[i - 1];
    if (i + 1 < n) s += off_diagonal[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

SymTridiag build_hamiltonian(const Potential& p, const Grid1D& grid) {
  const auto u = sample_potential(p, grid);
  const double h = grid.spacing();
  const std::size_t m = grid.size() - 2;
  SymTridiag H;
  H.diagonal.resize(m);
  H.off_diagonal.assign(m - 1, -0.5 / (h * h));
  for (std::size_t i = 0; i < m; ++i) H.diagonal[i] = 1.0 / (h * h) + u[i + 1];
  return H;
}

namespace {

// The eigensolver works in extended precision: with ||H|| ~ 1/h^2 the
// backward error of a double-precision solve already sits at the residual
// tolerance, while rounding an extended-precision eigenvector to double
// leaves a residual two orders of magnitude below it.
using real = long double;

class TridiagSolver {
 public:
  explicit TridiagSolver(const SymTridiag& h)
      : d_(h.diagonal.begin(), h.diagonal.end()), e_(h.off_diagonal.begin(), h.off_diagonal.end()), n_(d_.size()) {
    norm_ = 0;
    pivmin_ = std::numeric_limits<real>::min();
    for (std::size_t i = 0; i < n_; ++i) {
      real r = std::abs(d_[i]);
      if (i > 0) r += std::abs(e_[i - 1]);
      if (i + 1 < n_) r += std::abs(e_[i]);
      norm_ = std::max(norm_, r);
    }
    for (real e : e_) pivmin_ = std::max(pivmin_, e * e * std::numeric_limits<real>::min());
    tiny_ = std::numeric_limits<real>::epsilon() * norm_;
  }

  real norm() const { return norm_; }
  std::size_t size() const { return n_; }

  // Gershgorin interval containing the spectrum.
  std::pair<real, real> bounds() const {
    real lo = std::numeric_limits<real>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n_; ++i) {
      real r = 0;
      if (i > 0) r += std::abs(e_[i - 1]);
      if (i + 1 < n_) r += std::abs(e_[i]);
      lo = std::min(lo, d_[i] - r);
      hi = std::max(hi, d_[i] + r);
    }
    const real pad = 1e-12L * std::max<real>(1, norm_);
    return {lo - pad, hi + pad};
  }

  // Number of eigenvalues strictly below x (Sturm sequence).
  std::size_t count_below(real x) const {
    std::size_t c = 0;
    real q = d_[0] - x;
    if (std::abs(q) < pivmin_) q = -pivmin_;
    if (q < 0) ++c;
    for (std::size_t i = 1; i < n_; ++i) {
      q = d_[i] - x - e_[i - 1] * e_[i - 1] / q;
      if (std::abs(q) < pivmin_) q = -pivmin_;
      if (q < 0) ++c;
    }
    return c;
  }

  // j-th smallest eigenvalue (0-based) by bisection.
  real eigenvalue(std::size_t j, real lo, real hi) const {
    for (int it = 0; it < 256; ++it) {
      const real mid = (lo + hi) / 2;
      if (mid <= lo || mid >= hi) break;
      if (hi - lo <= 2 * std::numeric_limits<real>::epsilon() * std::max(std::abs(lo), std::abs(hi)) + pivmin_) break;
      if (count_below(mid) > j)
        hi = mid;
      else
        lo = mid;
    }
    return (lo + hi) / 2;
  }

  // Eigenvector for an accurate eigenvalue from the twisted factorization of
  // H - shift: forward and backward pivots meet where the combined pivot is
  // smallest, and the vector follows from the one-sided recurrences.
  std::vector<real> twisted_vector(real shift) const {
    const std::size_t n = n_;
    std::vector<real> fwd(n), bwd(n);
    fwd[0] = guard(d_[0] - shift);
    for (std::size_t i = 1; i < n; ++i) fwd[i] = guard(d_[i] - shift - e_[i - 1] * e_[i - 1] / fwd[i - 1]);
    bwd[n - 1] = guard(d_[n - 1] - shift);
    for (std::size_t i = n - 1; i-- > 0;) bwd[i] = guard(d_[i] - shift - e_[i] * e_[i] / bwd[i + 1]);
    std::size_t r = 0;
    real best = std::numeric_limits<real>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const real gamma = std::abs(fwd[i] + bwd[i] - (d_[i] - shift));
      if (gamma < best) {
        best = gamma;
        r = i;
      }
    }
    std::vector<real> z(n, 0);
    z[r] = 1;
    for (std::size_t i = r; i-- > 0;) z[i] = -(e_[i] / fwd[i]) * z[i + 1];
    for (std::size_t i = r + 1; i < n; ++i) z[i] = -(e_[i - 1] / bwd[i]) * z[i - 1];
    return z;
  }

  // Solves (H - shift) x = rhs in place with partial pivoting.
  void shifted_solve(real shift, std::vector<real>& rhs) const {
    const std::size_t n = n_;
    std::vector<real> u0(n), u1(n, 0), u2(n, 0), mult(n, 0);
    std::vector<std::uint8_t> swapped(n, 0);
    real p0 = d_[0] - shift;
    real p1 = n > 1 ? e_[0] : 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const real sub = e_[i];
      const real dn = d_[i + 1] - shift;
      const real sn = i + 2 < n ? e_[i + 1] : 0;
      if (std::abs(p0) >= std::abs(sub)) {
        if (p0 == 0) p0 = tiny_;
        const real m = sub / p0;
        u0[i] = p0;
        u1[i] = p1;
        mult[i] = m;
        p0 = dn - m * p1;
        p1 = sn;
      } else {
        const real m = p0 / sub;
        u0[i] = sub;
        u1[i] = dn;
        u2[i] = sn;
        mult[i] = m;
        swapped[i] = 1;
        p0 = p1 - m * dn;
        p1 = -m * sn;
      }
    }
    u0[n - 1] = p0 == 0 ? tiny_ : p0;
    real pending = rhs[0];
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const real next = rhs[i + 1];
      if (swapped[i]) {
        rhs[i] = next;
        pending = pending - mult[i] * next;
      } else {
        rhs[i] = pending;
        pending = next - mult[i] * pending;
      }
    }
    rhs[n - 1] = pending;
    for (std::size_t k = n; k-- > 0;) {
      real s = rhs[k];
      if (k + 1 < n) s -= u1[k] * rhs[k + 1];
      if (k + 2 < n) s -= u2[k] * rhs[k + 2];
      rhs[k] = s / u0[k];
    }
  }

  std::vector<real> apply(const std::vector<real>& x) const {
    std::vector<real> y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      real s = d_[i] * x[i];
      if (i > 0) s += e_[i - 1] * x[i - 1];
      if (i + 1 < n_) s += e_[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }

 private:
  real guard(real v) const { return std::abs(v) < tiny_ ? (v < 0 ? -tiny_ : tiny_) : v; }

  std::vector<real> d_;
  std::vector<real> e_;
  std::size_t n_;
  real norm_;
  real pivmin_;
  real tiny_;
};

template <typename T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
  T s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(std::vector<real>& v) {
  const real s = std::sqrt(dot(v, v));
  for (real& x : v) x /= s;
}

}  // namespace

TridiagEigen solve_tridiagonal(const SymTridiag& h, std::size_t k) {
  const std::size_t n = h.size();
  if (n == 0 || h.off_diagonal.size() + 1 != n) precondition("malformed tridiagonal matrix");
  if (k == 0 || k >= n) precondition("eigenpair count must satisfy 0 < k < dimension");
  const TridiagSolver solver(h);
  auto [lo, hi] = solver.bounds();

  std::vector<real> values;
  for (std::size_t j = 0; j < k; ++j) {
    values.push_back(solver.eigenvalue(j, lo, hi));
    lo = values.back() - 1e-12L * std::max<real>(1, solver.norm());
  }

  constexpr int max_iterations = 12;
  const real cluster = 1e-3L * solver.norm();
  std::mt19937 rng(20240521u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<std::vector<real>> found;
  TridiagEigen out;
  for (std::size_t j = 0; j < k; ++j) {
    real lambda = values[j];
    std::vector<double> rounded;
    // Orthogonalizes against earlier vectors of the same cluster, normalizes,
    // and accepts the vector if its double-precision residual passes.
    auto settle = [&](std::vector<real>& x) {
      for (std::size_t i = 0; i < j; ++i) {
        if (std::abs(values[i] - values[j]) > cluster) continue;
        const real c = dot(x, found[i]);
        for (std::size_t p = 0; p < n; ++p) x[p] -= c * found[i][p];
      }
      normalize(x);
      const real rq = dot(x, solver.apply(x));
      rounded.assign(x.begin(), x.end());
      const auto hx = h.apply(rounded);
      double res = 0.0, peak = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        res = std::max(res, std::abs(hx[p] - static_cast<double>(rq) * rounded[p]));
        peak = std::max(peak, std::abs(rounded[p]));
      }
      if (res > 1e-8 * peak) return false;
      lambda = rq;
      return true;
    };
    std::vector<real> x = solver.twisted_vector(lambda);
    bool converged = settle(x);
    if (!converged)
      for (real& v : x) v += 1e-3L * dist(rng);
    for (int it = 0; it < max_iterations && !converged; ++it) {
      solver.shifted_solve(lambda, x);
      converged = settle(x) && it >= 1;
    }
    if (!converged)
      throw Error("convergence", "eigenvector iteration did not converge for eigenpair " + std::to_string(j) +
                                     " after " + std::to_string(max_iterations) + " iterations");
    values[j] = lambda;
    apply_sign_convention(rounded);
    if (rounded != std::vector<double>(x.begin(), x.end()))
      for (real& v : x) v = -v;
    out.values.push_back(static_cast<double>(lambda));
    out.vectors.push_back(std::move(rounded));
    found.push_back(std::move(x));
  }
  return out;
}

std::string to_string(BasisKind k) {
  switch (k) {
    case BasisKind::Numerical: return "numerical";
    case BasisKind::AnalyticWell: return "analytic_well";
    case BasisKind::AnalyticHarmonic: return "analytic_harmonic";
    case BasisKind::AnalyticBox: return "analytic_box";
  }
  return "unknown";
}

EigenBasis::EigenBasis(BasisKind kind, Grid grid, std::vector<double> energies,
                       std::vector<ScalarField> states, std::vector<std::array<int, 2>> labels,
                       std::optional<Potential> potential, Analytic analytic,
                       std::map<std::string, double> metadata)
    : kind_(kind),
      grid_(std::move(grid)),
      energies_(std::move(energies)),
      states_(std::move(states)),
      labels_(std::move(labels)),
      potential_(std::move(potential)),
      analytic_(analytic),
      metadata_(std::move(metadata)) {
  if (energies_.empty()) precondition("eigenbasis must hold at least one state");
  if (states_.size() != energies_.size() || labels_.size() != energies_.size())
    precondition("eigenbasis energies, states and labels differ in length");
  for (const auto& s : states_)
    if (!(s.grid() == grid_)) precondition("eigenbasis state lives on a different grid");
  for (std::size_t i = 1; i < energies_.size(); ++i) {
    const bool ok = grid_.dims() == 1 ? energies_[i] > energies_[i - 1] : energies_[i] >= energies_[i - 1];
    if (!ok) precondition("eigenbasis energies must be ascending (index " + std::to_string(i) + ")");
  }
}

ScalarField EigenBasis::potential_field() const {
  if (grid_.dims() == 2 || !potential_) return ScalarField(grid_, std::vector<double>(grid_.size(), 0.0));
  return sample_potential(*potential_, grid_.axis(0));
}

PointValue EigenBasis::evaluate(std::size_t i, double x, double y) const {
  const auto& lab = labels_.at(i);
  PointValue pv;
  switch (kind_) {
    case BasisKind::AnalyticWell: {
      const double a = analytic_.half_width;
      const double k = lab[0] * pi / (2 * a);
      pv.value = std::sin(k * (x + a)) / std::sqrt(a);
      pv.grad[0] = k * std::cos(k * (x + a)) / std::sqrt(a);
      return pv;
    }
    case BasisKind::AnalyticHarmonic: {
      const auto [v, d] = harmonic_point(lab[0], analytic_.omega, x);
      pv.value = v;
      pv.grad[0] = d;
      return pv;
    }
    case BasisKind::AnalyticBox:
      return box_point(lab, analytic_, x, y);
    case BasisKind::Numerical: {
      if (grid_.dims() != 1) precondition("numerical bases are one-dimensional");
      const auto st = cubic_stencil(grid_.axis(0), x);
      const auto& f = states_.at(i);
      for (std::size_t q = 0; q < 4; ++q) {
        pv.value += st.value[q] * f[st.first + q];
        pv.grad[0] += st.slope[q] * f[st.first + q];
      }
      return pv;
    }
  }
  return pv;
}

EnergyState analytic_infinite_well(int n, double half_width, const Grid1D& grid) {
  if (n < 1) precondition("infinite-well index starts at 1");
  if (!(half_width > 0)) precondition("well half-width must be positive");
  require_well_grid(half_width, grid);
  const double a = half_width;
  const double k = n * pi / (2 * a);
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = std::sin(k * (grid[i] + a)) / std::sqrt(a);
  v.front() = v.back() = 0.0;
  return {n * n * pi * pi / (8 * a * a), ScalarField(Grid(grid), std::move(v))};
}

EnergyState analytic_harmonic(int n, double omega, const Grid1D& grid) {
  if (n < 0) precondition("oscillator index starts at 0");
  if (!(omega > 0)) precondition("oscillator frequency must be positive");
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = harmonic_point(n, omega, grid[i]).first;
  const double edge = std::max(std::abs(v.front()), std::abs(v.back()));
  if (!(edge < 1e-12))
    precondition("grid too narrow for oscillator state " + std::to_string(n) +
                 ": edge amplitude " + format_number(edge));
  return {(n + 0.5) * omega, ScalarField(Grid(grid), std::move(v))};
}

EigenBasis well_basis(double half_width, const Grid1D& grid, std::size_t count) {
  std::vector<double> e;
  std::vector<ScalarField> s;
  std::vector<std::array<int, 2>> labels;
  for (std::size_t n = 1; n <= count; ++n) {
    auto st = analytic_infinite_well(static_cast<int>(n), half_width, grid);
    e.push_back(st.energy);
    s.push_back(std::move(st.state));
    labels.push_back({static_cast<int>(n), 0});
  }
  EigenBasis::Analytic an;
  an.half_width = half_width;
  return EigenBasis(BasisKind::AnalyticWell, Grid(grid), std::move(e), std::move(s), std::move(labels),
                    InfiniteWell{half_width}, an);
}

EigenBasis harmonic_basis(double omega, const Grid1D& grid, std::size_t count) {
  std::vector<double> e;
  std::vector<ScalarField> s;
  std::vector<std::array<int, 2>> labels;
  for (std::size_t n = 0; n < count; ++n) {
    auto st = analytic_harmonic(static_cast<int>(n), omega, grid);
    e.push_back(st.energy);
    s.push_back(std::move(st.state));
    labels.push_back({static_cast<int>(n), 0});
  }
  EigenBasis::Analytic an;
  an.omega = omega;
  return EigenBasis(BasisKind::AnalyticHarmonic, Grid(grid), std::move(e), std::move(s), std::move(labels),
                    Harmonic{omega}, an);
}

EigenBasis box_basis(const Grid& grid, const std::vector<std::array<int, 2>>& labels) {
  if (grid.dims() != 2) precondition("box basis needs a 2D grid");
  if (labels.empty()) precondition("box basis needs at least one state");
  EigenBasis::Analytic an;
  an.origin = {grid.axis(0).x_min(), grid.axis(1).x_min()};
  an.length = {grid.axis(0).x_max() - an.origin[0], grid.axis(1).x_max() - an.origin[1]};
  std::vector<double> e;
  std::vector<ScalarField> s;
  for (const auto& lab : labels) {
    if (lab[0] < 1 || lab[1] < 1) precondition("box quantum numbers start at 1");
    e.push_back(0.5 * pi * pi *
                (lab[0] * lab[0] / (an.length[0] * an.length[0]) + lab[1] * lab[1] / (an.length[1] * an.length[1])));
  }
  for (std::size_t i = 1; i < e.size(); ++i)
    if (e[i] < e[i - 1]) precondition("box states must be listed in ascending energy");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::vector<double> v(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const auto [i0, j0] = grid.point(p);
      const bool wall = i0 == 0 || j0 == 0 || i0 + 1 == grid.extent(0) || j0 + 1 == grid.extent(1);
      const auto pos = grid.position(p);
      v[p] = wall ? 0.0 : box_point(labels[i], an, pos[0], pos[1]).value;
    }
    s.emplace_back(grid, std::move(v));
  }
  return EigenBasis(BasisKind::AnalyticBox, grid, std::move(e), std::move(s), labels, std::nullopt, an);
}

EigenBasis solve_eigen(const SymTridiag& h, std::size_t k, const Grid1D& grid, const Potential& potential) {
  if (h.size() + 2 != grid.size()) precondition("Hamiltonian size does not match the grid interior");
  auto eig = solve_tridiagonal(h, k);
  std::vector<ScalarField> states;
  std::vector<std::array<int, 2>> labels;
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> v(grid.size(), 0.0);
    std::copy(eig.vectors[j].begin(), eig.vectors[j].end(), v.begin() + 1);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
    const double norm = std::sqrt(integrate(ScalarField(Grid(grid), std::move(sq))));
    for (double& x : v) x /= norm;
    states.emplace_back(Grid(grid), std::move(v));
    labels.push_back({static_cast<int>(j), 0});
  }
  std::map<std::string, double> meta;
  if (const auto* b = std::get_if<WellWithBarrier>(&potential)) meta["barrier_width_snapped"] = snap_barrier(*b, grid).width;
  return EigenBasis(BasisKind::Numerical, Grid(grid), std::move(eig.values), std::move(states), std::move(labels),
                    potential, {}, std::move(meta));
}

EigenBasis numerical_basis(const Potential& potential, const Grid1D& grid, std::size_t k) {
  return solve_eigen(build_hamiltonian(potential, grid), k, grid, potential);
}

EigenCache::EigenCache() {
  if (const char* env = std::getenv("MADELUNG_CACHE_DIR"); env && *env) dir_ = std::filesystem::path(env);
}

EigenCache::EigenCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {}

std::string EigenCache::key(const Potential& potential, const Grid1D& grid, std::size_t k) {
  const std::string text = describe(potential) + "|" + format_number(grid.x_min()) + "|" +
                           format_number(grid.x_max()) + "|" + std::to_string(grid.size()) + "|" +
                           std::to_string(k);
  return hex(fnv1a(text));
}

std::shared_ptr<const EigenBasis> EigenCache::get(const Potential& potential, const Grid1D& grid, std::size_t k) {
  const std::lock_guard lock(mutex_);
  const std::string id = key(potential, grid, k);
  if (auto it = memo_.find(id); it != memo_.end()) {
    ++hits_;
    return it->second;
  }
  std::shared_ptr<const EigenBasis> basis;
  if (dir_) {
    const auto path = *dir_ / ("eigen_" + id + ".json");
    if (std::filesystem::exists(path)) {
      basis = std::make_shared<const EigenBasis>(load_basis(path));
      ++hits_;
    }
  }
  if (!basis) {
    basis = std::make_shared<const EigenBasis>(numerical_basis(potential, grid, k));
    ++solves_;
    if (dir_) {
      std::filesystem::create_directories(*dir_);
      save_basis(*basis, *dir_ / ("eigen_" + id + ".json"));
    }
  }
  memo_.emplace(id, basis);
  return basis;
}

}  // namespace madelung
