#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "madelung/error.hpp"
#include "madelung/spectral.hpp"

using namespace madelung;
using Catch::Approx;
using std::numbers::pi;

namespace {

double inner(const ScalarField& a, const ScalarField& b) {
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i] * b[i];
  return integrate(ScalarField(a.grid(), std::move(v)));
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("madelung_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("hamiltonian stencil") {
  const auto H = build_hamiltonian(InfiniteWell{2.0}, Grid1D(-2.0, 2.0, 5));
  REQUIRE(H.size() == 3);
  for (double d : H.diagonal) CHECK(d == 1.0);
  for (double e : H.off_diagonal) CHECK(e == -0.5);

  SECTION("barrier adds exactly its height inside the snapped footprint") {
    const Grid1D g(-1.0, 1.0, 2001);
    const auto H0 = build_hamiltonian(InfiniteWell{1.0}, g);
    const auto Hb = build_hamiltonian(WellWithBarrier{1.0, 15.0, 0.2}, g);
    for (std::size_t i = 0; i < H0.size(); ++i) {
      const double x = g[i + 1];
      const double diff = Hb.diagonal[i] - H0.diagonal[i];
      if (std::abs(x) < 0.1 - 1e-9) CHECK(diff == 15.0);
      if (std::abs(x) > 0.1 + 1e-9) CHECK(diff == 0.0);
    }
    CHECK(snap_barrier(WellWithBarrier{1.0, 15.0, 0.2}, g).width == Approx(0.2).margin(1e-12));
  }
  SECTION("barrier width snaps to the grid") {
    const Grid1D g(-1.0, 1.0, 11);  // h = 0.2
    const auto snap = snap_barrier(WellWithBarrier{1.0, 1.0, 0.3}, g);
    CHECK(snap.width == Approx(0.4));
  }
  SECTION("wells demand a matching grid") {
    CHECK_THROWS_AS(build_hamiltonian(InfiniteWell{1.0}, Grid1D(-1.0, 1.5, 11)), Error);
  }
}

TEST_CASE("tridiagonal solver agrees with a dense solver") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 60;
  SymTridiag T;
  for (std::size_t i = 0; i < n; ++i) T.diagonal.push_back(3 * u(rng));
  for (std::size_t i = 0; i + 1 < n; ++i) T.off_diagonal.push_back(u(rng));
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) M(i, i) = T.diagonal[i];
  for (std::size_t i = 0; i + 1 < n; ++i) M(i, i + 1) = M(i + 1, i) = T.off_diagonal[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(M);

  const std::size_t k = 12;
  const auto eig = solve_tridiagonal(T, k);
  for (std::size_t j = 0; j < k; ++j) {
    CHECK(eig.values[j] == Approx(dense.eigenvalues()(j)).margin(1e-11));
    double overlap = 0.0;
    for (std::size_t i = 0; i < n; ++i) overlap += eig.vectors[j][i] * dense.eigenvectors()(i, j);
    CHECK(std::abs(overlap) == Approx(1.0).margin(1e-9));
  }
  CHECK_THROWS_AS(solve_tridiagonal(T, n), Error);
  CHECK_THROWS_AS(solve_tridiagonal(T, 0), Error);
}

TEST_CASE("empty well eigenvalues against the closed form") {
  const Grid1D g(-1.0, 1.0, 2001);
  const auto basis = numerical_basis(InfiniteWell{1.0}, g, 4);
  for (int n = 1; n <= 4; ++n) {
    const double exact = n * n * pi * pi / 8;
    CHECK(std::abs(basis.energy(n - 1) - exact) / exact < 1e-3);
  }
  SECTION("normalization, orthogonality and sign convention") {
    for (std::size_t m = 0; m < 4; ++m) {
      CHECK(std::abs(inner(basis.state(m), basis.state(m)) - 1.0) < 1e-8);
      for (std::size_t n = 0; n < m; ++n) CHECK(std::abs(inner(basis.state(m), basis.state(n))) < 1e-6);
      CHECK(basis.state(m)[1] > 0);
    }
  }
  SECTION("numerical states match the closed-form states") {
    for (int n = 1; n <= 4; ++n) {
      const auto exact = analytic_infinite_well(n, 1.0, g);
      double err = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(exact.state[i] - basis.state(n - 1)[i]));
      CHECK(err < 1e-4);
    }
  }
  SECTION("Rayleigh quotient reproduces each energy") {
    const auto H = build_hamiltonian(InfiniteWell{1.0}, g);
    for (std::size_t m = 0; m < 4; ++m) {
      std::vector<double> v(basis.state(m).values().begin() + 1, basis.state(m).values().end() - 1);
      const auto hv = H.apply(v);
      double num = 0, den = 0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        num += v[i] * hv[i];
        den += v[i] * v[i];
      }
      CHECK(std::abs(num / den - basis.energy(m)) / basis.energy(m) < 1e-8);
      double res = 0.0, peak = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        res = std::max(res, std::abs(hv[i] - basis.energy(m) * v[i]));
        peak = std::max(peak, std::abs(v[i]));
      }
      CHECK(res <= 1e-8 * peak);
    }
  }
  SECTION("halving h changes energies by O(h^2)") {
    const auto coarse = numerical_basis(InfiniteWell{1.0}, Grid1D(-1.0, 1.0, 501), 4);
    const auto fine = numerical_basis(InfiniteWell{1.0}, Grid1D(-1.0, 1.0, 1001), 4);
    for (int n = 1; n <= 4; ++n) {
      const double exact = n * n * pi * pi / 8;
      const double ratio = (coarse.energy(n - 1) - exact) / (fine.energy(n - 1) - exact);
      CHECK(ratio == Approx(4.0).epsilon(0.01));
    }
  }
}

TEST_CASE("harmonic oscillator") {
  SECTION("finite differences on [-2, 2]") {
    const auto basis = numerical_basis(Harmonic{10.0}, Grid1D(-2.0, 2.0, 2001), 3);
    for (int n = 0; n < 3; ++n) CHECK(std::abs(basis.energy(n) - (n + 0.5) * 10) / ((n + 0.5) * 10) < 1e-3);
  }
  SECTION("closed form") {
    const Grid1D g(-3.0, 3.0, 2001);
    const auto s0 = analytic_harmonic(0, 10.0, g);
    const auto s1 = analytic_harmonic(1, 10.0, g);
    CHECK(s0.energy == 5.0);
    CHECK(s1.energy == 15.0);
    CHECK(std::abs(inner(s0.state, s0.state) - 1) < 1e-8);
    CHECK(std::abs(inner(s0.state, s1.state)) < 1e-10);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(s0.state[i] == Approx(s0.state[g.size() - 1 - i]).margin(1e-15));
    // independent formula for the first excited state
    const double x = 0.3;
    const double expect = -std::pow(10 / pi, 0.25) * std::sqrt(2 * 10.0) * x * std::exp(-5 * x * x);
    CHECK(harmonic_basis(10.0, g, 2).evaluate(1, x).value == Approx(expect).epsilon(1e-12));
    CHECK_THROWS_AS(analytic_harmonic(0, 10.0, Grid1D(-1.0, 1.0, 101)), Error);
  }
  SECTION("finite-difference states approach the closed form") {
    const Grid1D g(-3.0, 3.0, 3001);
    const auto num = numerical_basis(Harmonic{10.0}, g, 3);
    const auto ana = harmonic_basis(10.0, g, 3);
    for (std::size_t n = 0; n < 3; ++n) {
      double err = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(num.state(n)[i] - ana.state(n)[i]));
      CHECK(err < 1e-4);
    }
  }
  SECTION("analytic gradient matches a difference quotient") {
    const auto b = harmonic_basis(10.0, Grid1D(-3.0, 3.0, 301), 4);
    for (std::size_t n = 0; n < 4; ++n) {
      const double d = 1e-6, x = 0.17;
      const double fd = (b.evaluate(n, x + d).value - b.evaluate(n, x - d).value) / (2 * d);
      CHECK(b.evaluate(n, x).grad[0] == Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("closed-form infinite well") {
  const Grid1D g(-1.0, 1.0, 2001);
  const auto s1 = analytic_infinite_well(1, 1.0, g);
  const auto s2 = analytic_infinite_well(2, 1.0, g);
  CHECK(s1.energy == Approx(pi * pi / 8));
  CHECK(s1.energy == Approx(1.2337).epsilon(1e-4));
  CHECK(s2.energy == Approx(4 * s1.energy));
  CHECK(std::abs(inner(s1.state, s1.state) - 1) < 1e-8);
  CHECK_THROWS_AS(analytic_infinite_well(0, 1.0, g), Error);
  CHECK_THROWS_AS(analytic_infinite_well(1, 2.0, g), Error);
}

TEST_CASE("quartic double well") {
  const Grid1D g(-1.25, 1.25, 2001);
  const auto b = numerical_basis(QuarticDoubleWell{}, g, 2);
  CHECK(potential_value(QuarticDoubleWell{}, 0.5) == 0.0);
  CHECK(potential_value(QuarticDoubleWell{}, 0.0) == 15.0);
  CHECK(b.energy(0) < b.energy(1));
  CHECK(b.energy(1) < 15.0);
  CHECK(b.energy(1) - b.energy(0) < 0.25 * b.energy(0));
  // parity: ground even, first excited odd
  double even = 0.0, odd = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    even = std::max(even, std::abs(b.state(0)[i] - b.state(0)[g.size() - 1 - i]));
    odd = std::max(odd, std::abs(b.state(1)[i] + b.state(1)[g.size() - 1 - i]));
  }
  CHECK(even < 1e-8);
  CHECK(odd < 1e-8);

  SECTION("widening the domain at fixed spacing leaves energies unchanged") {
    const auto wide = numerical_basis(QuarticDoubleWell{}, Grid1D(-1.5, 1.5, 2401), 2);
    CHECK(std::abs(wide.energy(0) - b.energy(0)) < 1e-6);
    CHECK(std::abs(wide.energy(1) - b.energy(1)) < 1e-6);
  }
}

TEST_CASE("tabulated constant potential shifts the spectrum") {
  const Grid1D g(-1.0, 1.0, 401);
  const auto free = numerical_basis(Tabulated{{-1.0, 1.0}, {0.0, 0.0}}, g, 3);
  const auto shifted = numerical_basis(Tabulated{{-1.0, 1.0}, {2.5, 2.5}}, g, 3);
  for (std::size_t n = 0; n < 3; ++n) CHECK(shifted.energy(n) - free.energy(n) == Approx(2.5).epsilon(1e-10));
}

TEST_CASE("box basis") {
  const Grid g(Grid1D(0.0, 1.0, 101), Grid1D(0.0, 1.0, 101));
  const auto b = box_basis(g, {{1, 2}, {2, 1}});
  CHECK(b.energy(0) == Approx(5 * pi * pi / 2));
  CHECK(b.energy(1) == b.energy(0));
  CHECK(std::abs(inner(b.state(0), b.state(0)) - 1) < 1e-8);
  CHECK(std::abs(inner(b.state(0), b.state(1))) < 1e-10);
  const auto pv = b.evaluate(0, 0.25, 0.125);
  CHECK(pv.value == Approx(2 * std::sin(pi / 4) * std::sin(pi / 4)));
}

TEST_CASE("numerical point evaluation interpolates the samples") {
  const Grid1D g(-1.0, 1.0, 801);
  const auto b = numerical_basis(InfiniteWell{1.0}, g, 2);
  const auto w = well_basis(1.0, g, 2);
  for (double x : {-0.99, -0.3, 0.0001, 0.77}) {
    CHECK(b.evaluate(1, x).value == Approx(w.evaluate(1, x).value).margin(1e-4));
    CHECK(b.evaluate(1, x).grad[0] == Approx(w.evaluate(1, x).grad[0]).margin(1e-3));
  }
  CHECK(b.evaluate(0, g[17]).value == Approx(b.state(0)[17]).epsilon(1e-14));
}

TEST_CASE("persistence and caching") {
  const auto dir = scratch_dir("cache");
  const Grid1D g(-1.0, 1.0, 301);
  const auto basis = numerical_basis(WellWithBarrier{1.0, 15.0, 0.2}, g, 5);
  save_basis(basis, dir / "b.json");
  const auto back = load_basis(dir / "b.json");
  CHECK(back.energies() == basis.energies());
  for (std::size_t n = 0; n < 5; ++n)
    CHECK(std::equal(back.state(n).values().begin(), back.state(n).values().end(), basis.state(n).values().begin()));
  CHECK(back.metadata().at("barrier_width_snapped") == basis.metadata().at("barrier_width_snapped"));

  EigenCache cache(dir);
  const auto a1 = cache.get(Harmonic{10.0}, g, 3);
  const auto a2 = cache.get(Harmonic{10.0}, g, 3);
  CHECK(a1 == a2);
  CHECK(cache.solves() == 1);
  EigenCache fresh(dir);
  const auto a3 = fresh.get(Harmonic{10.0}, g, 3);
  CHECK(fresh.solves() == 0);
  CHECK(a3->energies() == a1->energies());
  CHECK(EigenCache::key(Harmonic{10.0}, g, 3) != EigenCache::key(Harmonic{10.0}, g, 4));
  std::filesystem::remove_all(dir);
}
