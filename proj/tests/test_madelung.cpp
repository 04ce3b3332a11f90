#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "madelung/error.hpp"
#include "madelung/madelung.hpp"
#include "oracles.hpp"

using namespace madelung;
using Catch::Approx;
using std::numbers::pi;

namespace {

std::shared_ptr<const EigenBasis> share(EigenBasis b) { return std::make_shared<const EigenBasis>(std::move(b)); }

// Two-state pair over the closed-form well states.
Superposition well_pair(std::size_t n) {
  return two_state(share(well_basis(1.0, Grid1D(-1.0, 1.0, n), 2)), 0, 1, -1.0);
}

Superposition vortex(std::size_t n) {
  const Grid g(Grid1D(0.0, 1.0, n), Grid1D(0.0, 1.0, n));
  const double s = 1.0 / std::sqrt(2.0);
  return Superposition(share(box_basis(g, {{1, 2}, {2, 1}})), {0, 1}, {s, complex(0.0, s)});
}

}  // namespace

TEST_CASE("polar fields of simple states") {
  SECTION("plane wave has constant phase gradient and no quantum potential") {
    const double k = 7.0;
    auto run = [&](std::size_t n) {
      const Grid g(Grid1D(0.0, 1.0, n));
      std::vector<complex> v(n), dt(n);
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = std::polar(1.0, k * g.axis(0)[i]);
        dt[i] = complex(0.0, -0.5 * k * k) * v[i];
      }
      const auto f = polar_fields(ComplexField(g, v), ComplexField(g, dt));
      const auto d = energy_decomposition(f, ScalarField(g, std::vector<double>(n, 0.0)), 0.5 * k * k);
      double eg = 0, eq = 0, es = 0, ek = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!f.valid[i]) continue;
        eg = std::max(eg, std::abs(f.grad_phase[0][i] - k));
        eq = std::max(eq, std::abs(d.per_particle.quantum_potential[i]));
        es = std::max(es, std::abs(d.per_particle.symmetric_kinetic[i]));
        ek = std::max(ek, std::abs(d.per_particle.flow_kinetic[i] - 0.5 * k * k));
      }
      CHECK(f.valid[0] == 0);
      CHECK(f.valid[1] == 0);
      CHECK(f.valid[2] == 1);
      return std::array<double, 4>{eg, eq, es, ek};
    };
    const auto a = run(401), b = run(801);
    CHECK(a[0] < 1e-3);
    CHECK(a[1] < 3e-3);  // k^4 h^2 / 8
    CHECK(a[2] < 3e-3);
    CHECK(a[2] / b[2] == Approx(4.0).epsilon(0.02));
    CHECK(a[3] < 1e-2);
    for (int i : {0, 3}) CHECK(a[i] / b[i] == Approx(4.0).epsilon(0.02));
  }
  SECTION("stationary state has no flow and dS/dt = -E") {
    auto b = share(numerical_basis(Harmonic{10.0}, Grid1D(-2.5, 2.5, 1001), 3));
    const auto s = eigenstate(b, 1);
    const auto f = polar_fields(s.evaluate(0.2), s.time_derivative(0.2));
    for (std::size_t i = 0; i < 1001; ++i) {
      if (!f.valid[i]) continue;
      CHECK(std::abs(f.grad_phase[0][i]) < 1e-9);
      CHECK(f.dphase_dt[i] == Approx(-b->energy(1)).epsilon(1e-12));
    }
    CHECK(f.valid[500] == 0);  // node at the origin
  }
  SECTION("vortex state has dS/dt = -5 pi^2 / 2") {
    const auto s = vortex(101);
    const auto f = polar_fields(s.evaluate(0.1), s.time_derivative(0.1));
    const std::size_t centre = s.grid().index(50, 50);
    CHECK(f.valid[centre] == 0);
    CHECK(f.valid[s.grid().index(49, 51)] == 0);
    CHECK(f.valid[s.grid().index(48, 50)] == 1);
    for (std::size_t p = 0; p < s.grid().size(); ++p)
      if (f.valid[p]) CHECK(std::abs(f.dphase_dt[p] + 5 * pi * pi / 2) < 1e-9);
  }
  SECTION("all-zero input is rejected") {
    const Grid g(Grid1D(0.0, 1.0, 11));
    const ComplexField z(g, std::vector<complex>(11, 0.0));
    CHECK_THROWS_AS(polar_fields(z, z), Error);
  }
}

TEST_CASE("energy ledger identities") {
  SECTION("ledger sums hold to rounding") {
    const auto s = well_pair(801);
    const auto d = decompose(s, 0.37);
    const auto& pp = d.per_particle;
    for (std::size_t i = 0; i < d.rho.size(); ++i) {
      if (!d.valid[i]) continue;
      const double scale = 1.0 + std::abs(pp.total_kinetic[i]) + std::abs(pp.quantum_potential[i]);
      CHECK(std::abs(pp.total_kinetic[i] - pp.flow_kinetic[i] - pp.symmetric_kinetic[i]) <= 1e-13 * scale);
      CHECK(std::abs(pp.quantum_potential[i] - pp.symmetric_kinetic[i] - pp.reduced_potential[i]) <= 1e-13 * scale);
      CHECK(pp.flow_kinetic[i] >= 0);
      CHECK(pp.symmetric_kinetic[i] >= 0);
      CHECK(std::abs(d.density.flow_kinetic[i] - d.rho[i] * pp.flow_kinetic[i]) <= 1e-12 * scale);
    }
  }
  SECTION("quantum potential converges to -lap R / 2R on a nodeless state") {
    // independent discretization straight from the amplitude
    auto err = [](std::size_t n) {
      const auto s = two_state(share(harmonic_basis(10.0, Grid1D(-2.5, 2.5, n), 2)), 0, 1, complex(0, 1));
      const auto d = decompose(s, 0.0);
      const auto f = polar_fields(s.evaluate(0.0), s.time_derivative(0.0));
      const auto lapR = laplacian(f.amplitude);
      double e = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double x = s.grid().axis(0)[i];
        if (!d.valid[i] || std::abs(x) > 1.0) continue;
        e = std::max(e, std::abs(d.per_particle.quantum_potential[i] + 0.5 * lapR[i] / f.amplitude[i]));
      }
      return e;
    };
    const double e1 = err(1001), e2 = err(2001);
    CHECK(e1 < 1e-2);
    CHECK(e1 / e2 == Approx(4.0).epsilon(0.05));
  }
  SECTION("reduced potential integrates to zero") {
    std::vector<Superposition> states{well_pair(2001)};
    auto ho = share(numerical_basis(Harmonic{10.0}, Grid1D(-2.5, 2.5, 2001), 2));
    states.push_back(two_state(ho, 0, 1));
    states.push_back(eigenstate(ho, 0));
    auto qw = share(numerical_basis(QuarticDoubleWell{}, Grid1D(-1.25, 1.25, 2001), 2));
    states.push_back(two_state(qw, 0, 1));
    for (const auto& s : states)
      for (double t : {0.0, 0.11, 0.5}) CHECK(std::abs(integrate(decompose(s, t).density.reduced_potential)) < 1e-8);
  }
  SECTION("symmetric kinetic plus potential gives the eigenvalue") {
    for (const Potential& pot : std::vector<Potential>{Harmonic{10.0}, QuarticDoubleWell{}}) {
      const Grid1D g = std::holds_alternative<Harmonic>(pot) ? Grid1D(-2.5, 2.5, 2001) : Grid1D(-1.25, 1.25, 2001);
      auto b = share(numerical_basis(pot, g, 3));
      for (std::size_t n = 0; n < 3; ++n) {
        const auto d = decompose(eigenstate(b, n), 0.0);
        CHECK(std::abs(integrate(d.density.symmetric_kinetic) + integrate(d.density.potential) - b->energy(n)) < 1e-6);
      }
    }
  }
  SECTION("with a step potential the identity needs uniform weights") {
    // Simpson weights alternate across the barrier edges; trapezoid weights
    // are the ones the difference operator sums by parts against.
    auto b = share(numerical_basis(WellWithBarrier{}, Grid1D(-1.0, 1.0, 2001), 3));
    for (std::size_t n = 0; n < 3; ++n) {
      const auto d = decompose(eigenstate(b, n), 0.0);
      double sum = 0.0, norm = 0.0;
      for (std::size_t i = 0; i < 2001; ++i) {
        const double w = (i == 0 || i == 2000) ? 0.5 : 1.0;
        sum += w * (d.density.symmetric_kinetic[i] + d.density.potential[i]);
        norm += w * d.rho[i];
      }
      CHECK(std::abs(sum / norm - b->energy(n)) < 1e-9);
    }
  }
  SECTION("particle energy density integrates to the mean energy") {
    const Superposition s(share(well_basis(1.0, Grid1D(-1.0, 1.0, 2001), 3)), {0, 1, 2}, {0.6, complex(0, 0.64), 0.48});
    for (double t : {0.0, 0.7}) CHECK(integrate(decompose(s, t).density.particle_energy) == Approx(s.mean_energy()).epsilon(1e-8));
  }
  SECTION("oscillator ground state") {
    auto b = share(numerical_basis(Harmonic{10.0}, Grid1D(-2.5, 2.5, 2001), 1));
    const auto d = decompose(eigenstate(b, 0), 0.0);
    double umax = 0.0;
    for (std::size_t i = 0; i < 2001; ++i) umax = std::max(umax, d.density.potential[i]);
    for (std::size_t i = 0; i < 2001; ++i) {
      if (!d.valid[i]) continue;
      CHECK(std::abs(d.per_particle.quantum_potential[i] + d.per_particle.potential[i] - 5.0) < 5e-3);
      CHECK(std::abs(d.density.symmetric_kinetic[i] - d.density.potential[i]) < 1e-3 * umax);
      CHECK(d.density.total_kinetic[i] == d.density.symmetric_kinetic[i]);
    }
  }
}

TEST_CASE("superoscillation masks") {
  SECTION("eigenstate: soft, hard and forbidden regions coincide") {
    auto b = share(numerical_basis(QuarticDoubleWell{}, Grid1D(-1.25, 1.25, 1001), 2));
    const auto m = classify_superoscillation(decompose(eigenstate(b, 0), 0.0));
    std::size_t count = 0;
    for (std::size_t i = 0; i < 1001; ++i) {
      if (!m.valid[i]) continue;
      CHECK(m.soft[i] == m.forbidden_global[i]);
      CHECK(m.hard[i] == m.forbidden_global[i]);
      count += m.soft[i];
    }
    CHECK(count > 0);
  }
  SECTION("well pair has hard points with K_a > 4 E_1") {
    // At t = 0 the state is real and K_a vanishes; shortly after the node
    // event the flow is fast enough.
    const auto s = well_pair(2001);
    const auto d = decompose(s, s.period() / 32);
    const auto m = classify_superoscillation(d);
    const double bound = pi * pi / 2;
    std::size_t hard = 0;
    for (std::size_t i = 0; i < 2001; ++i) {
      if (!m.valid[i]) continue;
      CHECK(static_cast<bool>(m.hard[i]) == (d.per_particle.flow_kinetic[i] > bound + 1e-12 * bound));
      hard += m.hard[i];
    }
    CHECK(hard > 0);
  }
  SECTION("inclusions and the reduced picture's larger area") {
    auto qw = share(numerical_basis(QuarticDoubleWell{}, Grid1D(-1.25, 1.25, 1001), 2));
    const auto s = two_state(qw, 0, 1);
    for (int k = 0; k < 16; ++k) {
      const auto m = classify_superoscillation(decompose(s, k * s.period() / 16));
      for (std::size_t i = 0; i < 1001; ++i) {
        if (m.forbidden_global[i]) CHECK(m.hard[i]);
        if (m.forbidden_local[i]) CHECK(m.soft[i]);
      }
      CHECK(region_measure(s.grid(), m.soft_reduced) >= region_measure(s.grid(), m.soft));
    }
  }
  SECTION("no superoscillation in a gently moving state") {
    const Grid g(Grid1D(0.0, 1.0, 201));
    std::vector<complex> v(201), dt(201);
    for (std::size_t i = 0; i < 201; ++i) {
      const double x = g.axis(0)[i];
      // R = 2 + cos: Q > 0 wherever R'' < 0 ... keep only a positive-Q window
      v[i] = std::polar(1.0 + 0.1 * std::sin(pi * x), 0.5 * x);
      dt[i] = complex(0.0, -10.0) * v[i];
    }
    const auto d = energy_decomposition(polar_fields(ComplexField(g, v), ComplexField(g, dt)),
                                        ScalarField(g, std::vector<double>(201, 0.0)), 10.0);
    const auto m = classify_superoscillation(d);
    for (std::size_t i = 0; i < 201; ++i) {
      CHECK(m.hard[i] == 0);
      CHECK(m.forbidden_global[i] == 0);
      CHECK(m.forbidden_local[i] == 0);
      if (m.valid[i]) CHECK(d.per_particle.quantum_potential[i] > 0);
      CHECK(m.soft[i] == 0);
    }
  }
}

TEST_CASE("residuals") {
  SECTION("eigenstates have vanishing residuals") {
    auto b = share(numerical_basis(WellWithBarrier{}, Grid1D(-1.0, 1.0, 1001), 3));
    const auto s = eigenstate(b, 2);
    const auto d = decompose(s, 0.3);
    CHECK(max_abs(hj_residual(d)) < 1e-8 * b->energy(2));
    CHECK(max_abs(continuity_residual(s, 0.3, 1e-3)) < 1e-9);
  }
  SECTION("well pair residuals are second order") {
    const double T = oracle::WellPair{}.period();
    auto hj = [&](std::size_t n) { return max_abs(hj_residual(decompose(well_pair(n), T / 8))); };
    auto cont = [&](std::size_t n, double dt) { return max_abs(continuity_residual(well_pair(n), T / 8, dt)); };
    const double h1 = hj(501), h2 = hj(1001);
    CHECK(h1 < 1e-2);
    CHECK(h1 / h2 == Approx(4.0).epsilon(0.05));
    const double c1 = cont(501, 2e-3), c2 = cont(1001, 1e-3);
    CHECK(c1 < 1e-2);
    CHECK(c1 / c2 == Approx(4.0).epsilon(0.05));
  }
  SECTION("vortex residuals away from the core") {
    auto hj = [](std::size_t n) {
      const auto s = vortex(n);
      const auto r = hj_residual(decompose(s, 0.0));
      double e = 0;
      for (std::size_t p = 0; p < s.grid().size(); ++p) {
        const auto [x, y] = s.grid().position(p);
        if (r.valid(p) && std::hypot(x - 0.5, y - 0.5) > 0.05) e = std::max(e, std::abs(r[p]));
      }
      return e;
    };
    const double e1 = hj(101), e2 = hj(201);
    CHECK(e1 / e2 == Approx(4.0).epsilon(0.1));
    // density is static, so only the discrete divergence remains
    const double c1 = max_abs(continuity_residual(vortex(101), 0.0, 1e-3));
    const double c2 = max_abs(continuity_residual(vortex(201), 0.0, 1e-3));
    CHECK(c1 / c2 == Approx(4.0).epsilon(0.1));
  }
}
