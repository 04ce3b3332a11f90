#pragma once

// Independent reference computations used by the test suites. Nothing here
// calls into the library's numerical routines.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using std::numbers::pi;
using cplx = std::complex<double>;

/// Closed-form equal superposition of the two lowest states of the
/// infinite well [-L, L].
struct WellPair {
  double L = 1.0;
  double e1() const { return pi * pi / (8 * L * L); }
  double period() const { return 2 * pi / (3 * e1()); }
  cplx psi(double x, double t) const {
    return (std::cos(pi * x / (2 * L)) * std::polar(1.0, -e1() * t) +
            std::sin(pi * x / L) * std::polar(1.0, -4 * e1() * t)) /
           std::sqrt(2 * L);
  }
  cplx dpsi_dx(double x, double t) const {
    return (-(pi / (2 * L)) * std::sin(pi * x / (2 * L)) * std::polar(1.0, -e1() * t) +
            (pi / L) * std::cos(pi * x / L) * std::polar(1.0, -4 * e1() * t)) /
           std::sqrt(2 * L);
  }
  double rho(double x, double t) const { return std::norm(psi(x, t)); }
  /// Probability left of x, by the closed-form antiderivative.
  double cdf(double x, double t) const {
    const double a = pi / (2 * L), b = pi / L;
    // |c|^2 + |s|^2 + 2 c s cos(3 E1 t), with c = cos(a x), s = sin(b x)
    auto F = [&](double y) {
      const double cc = y / 2 + std::sin(2 * a * y) / (4 * a);
      const double ss = y / 2 - std::sin(2 * b * y) / (4 * b);
      // integral of cos(a y) sin(b y) = [-cos((b-a)y)/(2(b-a)) - cos((b+a)y)/(2(b+a))]
      const double cs = -std::cos((b - a) * y) / (2 * (b - a)) - std::cos((b + a) * y) / (2 * (b + a));
      return cc + ss + 2 * std::cos(3 * e1() * t) * cs;
    };
    return (F(x) - F(-L)) / (2 * L);
  }
};

/// x with cdf(x) = q by plain bisection.
inline double invert_cdf(const std::function<double(double)>& cdf, double lo, double hi, double q) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Composite Simpson integral of f on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(a + i * h);
  return s * h / 3;
}

/// Richardson extrapolation of a quantity with error ~ C h^p.
inline double richardson(double coarse, double fine, double ratio = 2.0, double order = 2.0) {
  const double f = std::pow(ratio, order);
  return (f * fine - coarse) / (f - 1);
}

/// Newton iteration for a zero of the closed-form well pair in (x, t).
inline bool well_pair_node(const WellPair& w, double& x, double& t) {
  for (int it = 0; it < 60; ++it) {
    const cplx f = w.psi(x, t);
    const cplx fx = w.dpsi_dx(x, t);
    const double d = 1e-7;
    const cplx ft = (w.psi(x, t + d) - w.psi(x, t - d)) / (2 * d);
    const double j11 = fx.real(), j12 = ft.real(), j21 = fx.imag(), j22 = ft.imag();
    const double det = j11 * j22 - j12 * j21;
    if (det == 0) return false;
    const double dx = (f.real() * j22 - f.imag() * j12) / det;
    const double dt = (j11 * f.imag() - j21 * f.real()) / det;
    x -= dx;
    t -= dt;
    if (std::abs(dx) < 1e-15 && std::abs(dt) < 1e-15) break;
  }
  return std::abs(w.psi(x, t)) < 1e-12;
}

}  // namespace oracle
