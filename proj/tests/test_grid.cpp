#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "madelung/error.hpp"
#include "madelung/grid.hpp"

using namespace madelung;
using Catch::Approx;
using std::numbers::pi;

namespace {

template <typename Fn>
ScalarField sample(const Grid1D& g, Fn fn) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = fn(g[i]);
  return ScalarField(Grid(g), std::move(v));
}

template <typename Fn>
ScalarField sample2(const Grid& g, Fn fn) {
  std::vector<double> v(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto p = g.position(k);
    v[k] = fn(p[0], p[1]);
  }
  return ScalarField(g, std::move(v));
}

double max_abs_error(const ScalarField& f, const ScalarField& ref, std::size_t skip = 0) {
  double e = 0.0;
  for (std::size_t i = skip; i + skip < f.size(); ++i)
    if (f.valid(i)) e = std::max(e, std::abs(f[i] - ref[i]));
  return e;
}

}  // namespace

TEST_CASE("grid construction and spacing") {
  Grid1D g(-1.0, 1.0, 5);
  CHECK(g.spacing() == 0.5);
  CHECK(g[0] == -1.0);
  CHECK(g[4] == 1.0);
  CHECK(g.nearest(0.26) == 3);
  CHECK(g.nearest(-7.0) == 0);
  CHECK(g.cell(0.99) == 3);
  CHECK(g.cell(1.0) == 3);
  CHECK_THROWS_AS(Grid1D(0.0, 1.0, 2), Error);
  CHECK_THROWS_AS(Grid1D(1.0, 0.0, 10), Error);
}

TEST_CASE("field rejects non-finite values only where valid") {
  Grid g(Grid1D(0.0, 1.0, 3));
  CHECK_THROWS_AS(ScalarField(g, {0.0, NAN, 1.0}), Error);
  CHECK_NOTHROW(ScalarField(g, {0.0, NAN, 1.0}, Mask{1, 0, 1}));
  CHECK_THROWS_AS(ScalarField(g, {0.0, 1.0}), Error);
}

TEST_CASE("integrate") {
  Grid1D g(0.0, 1.0, 101);
  CHECK(integrate(sample(g, [](double) { return 1.0; })) == Approx(1.0).epsilon(1e-15));
  const double s = integrate(sample(g, [](double x) { return std::pow(std::sin(pi * x), 2); }));
  CHECK(std::abs(s - 0.5) < 1e-8);

  SECTION("even point count uses the trapezoid rule") {
    Grid1D ge(0.0, 1.0, 100);
    CHECK(integrate(sample(ge, [](double x) { return x; })) == Approx(0.5).epsilon(1e-14));
  }
  SECTION("masked points are rejected, masked variant treats them as zero") {
    Grid1D g5(0.0, 1.0, 5);
    ScalarField f(Grid(g5), {1, 1, 100, 1, 1}, Mask{1, 1, 0, 1, 1});
    CHECK_THROWS_WITH(integrate(f), Catch::Matchers::ContainsSubstring("index 2"));
    const auto w = quadrature_weights(g5);
    CHECK(integrate_masked(f) == Approx(1.0 - w[2]));
  }
  SECTION("2D iterates the rule") {
    Grid g2(Grid1D(0.0, 1.0, 51), Grid1D(0.0, 2.0, 41));
    const double v = integrate(sample2(g2, [](double x, double y) { return x * y * y; }));
    CHECK(v == Approx(0.5 * 8.0 / 3.0).epsilon(1e-6));
  }
}

TEST_CASE("gradient") {
  Grid1D g(-1.0, 1.0, 41);
  SECTION("quadratic is exact") {
    const auto d = gradient(sample(g, [](double x) { return x * x; }));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(d[i] == Approx(2.0 * g[i]).margin(1e-12));
  }
  SECTION("constant gives zero") {
    const auto d = gradient(sample(g, [](double) { return 3.0; }));
    for (double v : d.values()) CHECK(v == Approx(0.0).margin(1e-12));
  }
  SECTION("second-order convergence for sin(5x)") {
    auto err = [](std::size_t n) {
      Grid1D gg(-1.0, 1.0, n);
      const auto d = gradient(sample(gg, [](double x) { return std::sin(5 * x); }));
      return max_abs_error(d, sample(gg, [](double x) { return 5 * std::cos(5 * x); }));
    };
    const double ratio = err(201) / err(401);
    CHECK(ratio > 3.6);
    CHECK(ratio < 4.4);
  }
  SECTION("integral of the gradient recovers the endpoint difference") {
    Grid1D gg(0.0, 2.0, 401);
    const auto d = gradient(sample(gg, [](double x) { return std::exp(-x) * std::cos(3 * x); }));
    const double expect = std::exp(-2.0) * std::cos(6.0) - 1.0;
    CHECK(std::abs(integrate(d) - expect) < 1e-4);
  }
  SECTION("mask propagates to stencil neighbours") {
    Grid1D g7(0.0, 1.0, 7);
    ScalarField f(Grid(g7), {0, 1, 2, 3, 4, 5, 6}, Mask{1, 1, 1, 0, 1, 1, 1});
    const auto d = gradient(f);
    CHECK(d.valid(1));
    CHECK_FALSE(d.valid(2));
    CHECK(d.valid(3));  // central stencil skips the centre point
    CHECK_FALSE(d.valid(4));
  }
}

TEST_CASE("laplacian") {
  SECTION("quadratic is exact, including one-sided edges") {
    Grid1D g(-1.0, 1.0, 21);
    const auto l = laplacian(sample(g, [](double x) { return x * x; }));
    for (double v : l.values()) CHECK(v == Approx(2.0).epsilon(1e-9));
  }
  SECTION("even reflection edge has zero integral with trapezoid weights") {
    Grid1D g(0.0, 1.0, 200);
    const auto l = laplacian(sample(g, [](double x) { return std::exp(x) * x; }),
                             EdgeRule::EvenReflection);
    CHECK(std::abs(integrate(l)) < 1e-9);
  }
  SECTION("2D analytic Laplacian with O(h^2) error") {
    const double L = 2.0;
    auto err = [&](std::size_t n) {
      Grid g(Grid1D(0.0, L, n), Grid1D(0.0, L, n));
      auto fn = [&](double x, double y) { return std::sin(pi * x / L) * std::sin(2 * pi * y / L); };
      const auto l = laplacian(sample2(g, fn));
      const auto ref = sample2(g, [&](double x, double y) { return -5 * pi * pi / (L * L) * fn(x, y); });
      return max_abs_error(l, ref);
    };
    const double e1 = err(41), e2 = err(81);
    CHECK(e1 < 0.05);
    CHECK(e1 / e2 > 3.6);  // at least second order (edges converge faster here)
  }
  SECTION("discrete product rule residual is O(h^2)") {
    auto residual = [](std::size_t n) {
      Grid1D g(0.0, 1.0, n);
      auto R = [](double x) { return 1.5 + std::cos(3 * x); };
      const auto r = sample(g, R);
      const auto rr = sample(g, [&](double x) { return R(x) * R(x); });
      const auto l2 = laplacian(rr), l1 = laplacian(r), d = gradient(r);
      double e = 0.0;
      for (std::size_t i = 1; i + 1 < n; ++i)
        e = std::max(e, std::abs(l2[i] - (2 * r[i] * l1[i] + 2 * d[i] * d[i])));
      return e;
    };
    CHECK(residual(101) / residual(201) == Approx(4.0).epsilon(0.1));
  }
  SECTION("linearity is exact") {
    Grid1D g(0.0, 1.0, 31);
    const auto a = sample(g, [](double x) { return std::sin(2 * x); });
    const auto b = sample(g, [](double x) { return x * x * x; });
    const auto ab = sample(g, [&](double x) { return 2.5 * std::sin(2 * x) - 3 * x * x * x; });
    const auto la = laplacian(a), lb = laplacian(b), lab = laplacian(ab);
    const auto ga = gradient(a), gb = gradient(b), gab = gradient(ab);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(lab[i] == Approx(2.5 * la[i] - 3 * lb[i]).margin(1e-9));
      CHECK(gab[i] == Approx(2.5 * ga[i] - 3 * gb[i]).margin(1e-12));
    }
  }
  SECTION("complex fields") {
    Grid1D g(0.0, 1.0, 11);
    std::vector<std::complex<double>> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = {g[i] * g[i], -g[i] * g[i]};
    const auto l = laplacian(ComplexField(Grid(g), v));
    CHECK(l[5].real() == Approx(2.0));
    CHECK(l[5].imag() == Approx(-2.0));
  }
}

TEST_CASE("csv round trip") {
  Grid1D g(0.0, 1.0, 5);
  ScalarField f(Grid(g), {0.1, 1.0 / 3.0, NAN, 2.0, -1e-300}, Mask{1, 1, 0, 1, 1});
  std::stringstream ss;
  write_csv(ss, f);
  const std::string text = ss.str();
  CHECK(text.rfind("x,re,mask\n", 0) == 0);
  const auto back = read_scalar_csv(ss);
  CHECK(back.grid() == f.grid());
  CHECK(back.mask() == f.mask());
  CHECK(back[1] == f[1]);
  CHECK(back[4] == f[4]);
  CHECK(format_number(0.1) == "0.1");
}
