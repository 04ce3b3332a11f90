#include "madelung/madelung.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "madelung/error.hpp"

namespace madelung {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Flat-index stride and extent of an axis.
struct AxisWalk {
  std::size_t stride;
  std::size_t extent;
  double h;
};

AxisWalk walk(const Grid& g, std::size_t axis) {
  const std::size_t stride = (g.dims() == 2 && axis == 0) ? g.extent(1) : 1;
  return {stride, g.extent(axis), g.axis(axis).spacing()};
}

std::size_t coord(const Grid& g, std::size_t p, std::size_t axis) { return g.point(p)[axis]; }

Mask wall_and_node_mask(const Grid& g, const std::vector<double>& rho, double eps) {
  const double peak = *std::max_element(rho.begin(), rho.end());
  Mask valid(g.size(), 1);
  for (std::size_t p = 0; p < g.size(); ++p) {
    for (std::size_t d = 0; d < g.dims(); ++d) {
      const std::size_t c = coord(g, p, d);
      if (c < 2 || c + 2 >= g.extent(d)) valid[p] = 0;
    }
  }
  // nodes, dilated to the surrounding 3x3 (or 3-point) block
  const std::size_t nx = g.extent(0), ny = g.dims() == 2 ? g.extent(1) : 1;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (!(rho[p] < eps * peak)) continue;
    const auto [i, j] = g.point(p);
    for (std::size_t a = i == 0 ? 0 : i - 1; a <= std::min(i + 1, nx - 1); ++a)
      for (std::size_t b = j == 0 ? 0 : j - 1; b <= std::min(j + 1, ny - 1); ++b) valid[g.index(a, b)] = 0;
  }
  return valid;
}

ScalarField masked(const Grid& g, std::vector<double> v, const Mask& valid) {
  for (std::size_t p = 0; p < v.size(); ++p)
    if (!valid[p]) v[p] = nan;
  return ScalarField(g, std::move(v), valid);
}

ScalarField per_particle(const ScalarField& density, const ScalarField& rho, const Mask& valid) {
  std::vector<double> v(rho.size());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = valid[p] ? density[p] / rho[p] : nan;
  return ScalarField(rho.grid(), std::move(v), valid);
}

ScalarField combine(const ScalarField& a, const ScalarField& b, double sign, const Mask& valid) {
  std::vector<double> v(a.size());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = valid[p] ? a[p] + sign * b[p] : nan;
  return ScalarField(a.grid(), std::move(v), valid);
}

}  // namespace

MadelungFields polar_fields(const ComplexField& psi, const ComplexField& dpsi_dt, double eps) {
  const Grid& g = psi.grid();
  if (!(dpsi_dt.grid() == g)) throw Error("precondition", "wavefunction and its time derivative live on different grids");
  std::vector<double> rho(g.size()), amp(g.size());
  double peak = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    rho[p] = std::norm(psi[p]);
    amp[p] = std::sqrt(rho[p]);
    peak = std::max(peak, rho[p]);
  }
  if (peak == 0.0) throw Error("precondition", "wavefunction vanishes everywhere");
  const Mask valid = wall_and_node_mask(g, rho, eps);

  std::vector<ScalarField> grad_phase;
  for (std::size_t d = 0; d < g.dims(); ++d) {
    const auto dpsi = gradient(psi, d);
    std::vector<double> v(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) v[p] = valid[p] ? std::imag(std::conj(psi[p]) * dpsi[p]) / rho[p] : nan;
    grad_phase.emplace_back(g, std::move(v), valid);
  }
  std::vector<double> dsdt(g.size());
  for (std::size_t p = 0; p < g.size(); ++p)
    dsdt[p] = valid[p] ? std::imag(std::conj(psi[p]) * dpsi_dt[p]) / rho[p] : nan;

  return {psi,
          dpsi_dt,
          ScalarField(g, std::move(rho)),
          ScalarField(g, std::move(amp)),
          std::move(grad_phase),
          ScalarField(g, std::move(dsdt), valid),
          valid};
}

EnergyDecomposition energy_decomposition(const MadelungFields& f, const ScalarField& potential, double band_limit) {
  const Grid& g = f.psi.grid();
  if (!(potential.grid() == g)) throw Error("precondition", "potential lives on a different grid");
  const std::size_t n = g.size();
  const auto& psi = f.psi;
  const auto& rho = f.rho;

  std::vector<double> kc(n, 0.0), ka(n, 0.0);
  for (std::size_t d = 0; d < g.dims(); ++d) {
    const auto w = walk(g, d);
    const auto dpsi = gradient(psi, d);
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t c = coord(g, p, d);
      const double fwd = c + 1 < w.extent ? std::norm((psi[p + w.stride] - psi[p]) / w.h) : -1.0;
      const double bwd = c > 0 ? std::norm((psi[p] - psi[p - w.stride]) / w.h) : -1.0;
      // one-sided half weight at the ends keeps the sum an exact summation by parts
      kc[p] += (fwd < 0) ? 0.5 * bwd : (bwd < 0) ? 0.5 * fwd : 0.25 * (fwd + bwd);
      const double j = std::imag(std::conj(psi[p]) * dpsi[p]);
      if (rho[p] > 0) ka[p] += 0.5 * j * j / rho[p];
    }
  }
  const auto lap_rho = laplacian(rho, EdgeRule::EvenReflection);
  std::vector<double> ks(n), qr(n), q(n), ep(n), u(n), kcl(n);
  for (std::size_t p = 0; p < n; ++p) {
    ks[p] = std::max(0.0, kc[p] - ka[p]);
    kc[p] = ka[p] + ks[p];
    qr[p] = -0.25 * lap_rho[p];
    q[p] = ks[p] + qr[p];
    ep[p] = -std::imag(std::conj(psi[p]) * f.dpsi_dt[p]);
    u[p] = rho[p] * potential[p];
    kcl[p] = ep[p] - u[p];
  }
  Ledger dens{ScalarField(g, q),   ScalarField(g, ka),  ScalarField(g, ks),  ScalarField(g, qr),
              ScalarField(g, kc),  ScalarField(g, ep),  ScalarField(g, kcl), ScalarField(g, u)};

  const Mask& valid = f.valid;
  auto K_a = per_particle(dens.flow_kinetic, rho, valid);
  auto K_s = per_particle(dens.symmetric_kinetic, rho, valid);
  auto Q_r = per_particle(dens.reduced_potential, rho, valid);
  auto E_p = per_particle(dens.particle_energy, rho, valid);
  auto U = masked(g, std::vector<double>(potential.values().begin(), potential.values().end()), valid);
  auto Q = combine(K_s, Q_r, 1.0, valid);
  auto K_c = combine(K_a, K_s, 1.0, valid);
  auto K_cl = combine(E_p, U, -1.0, valid);
  Ledger part{std::move(Q), std::move(K_a), std::move(K_s), std::move(Q_r), std::move(K_c), std::move(E_p),
              std::move(K_cl), std::move(U)};
  return {std::move(part), std::move(dens), rho, valid, band_limit};
}

EnergyDecomposition decompose(const Superposition& s, double t, double eps) {
  const auto f = polar_fields(s.evaluate(t), s.time_derivative(t), eps);
  return energy_decomposition(f, s.basis().potential_field(), s.band_limit());
}

SuperoscillationMask classify_superoscillation(const EnergyDecomposition& d) {
  const auto& pp = d.per_particle;
  const std::size_t n = d.rho.size();
  const double e = d.band_limit;
  const double tol = 1e-12 * std::max(1.0, std::abs(e));
  SuperoscillationMask m{Mask(n, 0), Mask(n, 0), Mask(n, 0), Mask(n, 0), Mask(n, 0), Mask(n, 0), d.valid};
  for (std::size_t p = 0; p < n; ++p) {
    if (!d.valid[p]) continue;
    const double ka = pp.flow_kinetic[p], kc = pp.total_kinetic[p], kcl = pp.kinetic_bound[p];
    const double global = e - pp.potential[p];
    m.soft[p] = ka > kcl + tol;
    m.hard[p] = ka > global + tol;
    m.soft_reduced[p] = kc > kcl + tol;
    m.hard_reduced[p] = kc > global + tol;
    m.forbidden_global[p] = global < -tol;
    m.forbidden_local[p] = kcl < -tol;
  }
  return m;
}

double region_measure(const Grid& grid, const Mask& m) {
  if (m.size() != grid.size()) throw Error("precondition", "mask does not match grid");
  const auto w = quadrature_weights(grid);
  double a = 0.0;
  for (std::size_t p = 0; p < m.size(); ++p)
    if (m[p]) a += w[p];
  return a;
}

ScalarField hj_residual(const EnergyDecomposition& d) {
  const auto& pp = d.per_particle;
  std::vector<double> v(d.rho.size());
  for (std::size_t p = 0; p < v.size(); ++p)
    v[p] = d.valid[p] ? pp.flow_kinetic[p] + pp.quantum_potential[p] + pp.potential[p] - pp.particle_energy[p] : nan;
  return ScalarField(d.rho.grid(), std::move(v), d.valid);
}

ScalarField continuity_residual(const Superposition& s, double t, double dt) {
  if (!(dt > 0)) throw Error("precondition", "time step must be positive");
  const Grid& g = s.grid();
  const auto plus = s.evaluate(t + dt), minus = s.evaluate(t - dt), psi = s.evaluate(t);
  std::vector<double> v(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) v[p] = (std::norm(plus[p]) - std::norm(minus[p])) / (2 * dt);
  Mask valid(g.size(), 1);
  for (std::size_t d = 0; d < g.dims(); ++d) {
    const auto dpsi = gradient(psi, d);
    std::vector<double> flux(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) flux[p] = std::imag(std::conj(psi[p]) * dpsi[p]);
    const auto div = gradient(ScalarField(g, std::move(flux)), d);
    for (std::size_t p = 0; p < g.size(); ++p) {
      v[p] += div[p];
      const std::size_t c = coord(g, p, d);
      if (c < 2 || c + 2 >= g.extent(d)) valid[p] = 0;
    }
  }
  return masked(g, std::move(v), valid);
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p)
    if (f.valid(p)) m = std::max(m, std::abs(f[p]));
  return m;
}

}  // namespace madelung
