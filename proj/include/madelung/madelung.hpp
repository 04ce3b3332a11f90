#pragma once

// Polar (fluid) form of a wavefunction and its energy ledger.
//
// All fields come from log-derivatives of Psi; the phase S itself is never
// unwrapped. Per-particle quantities are density / rho and are invalid at
// masked points (near nodes and at the two outermost points of each axis).

#include <vector>

#include "madelung/grid.hpp"
#include "madelung/states.hpp"

namespace madelung {

struct MadelungFields {
  ComplexField psi;
  ComplexField dpsi_dt;
  ScalarField rho;                   ///< |Psi|^2
  ScalarField amplitude;             ///< R = sqrt(rho)
  std::vector<ScalarField> grad_phase;  ///< grad S, one field per axis (this is also v_a)
  ScalarField dphase_dt;             ///< dS/dt
  Mask valid;                        ///< 0 near nodes and at the walls
};

/// Default node threshold relative to max rho.
inline constexpr double node_threshold = 1e-10;

/// Points with rho < eps * max(rho) are nodes; they and their neighbours are
/// masked, as are the two outermost points along every axis.
MadelungFields polar_fields(const ComplexField& psi, const ComplexField& dpsi_dt, double eps = node_threshold);

/// One column of the ledger in either per-particle or density form.
struct Ledger {
  ScalarField quantum_potential;   ///< Q = -1/2 lap R / R
  ScalarField flow_kinetic;        ///< K_a = |grad S|^2 / 2
  ScalarField symmetric_kinetic;   ///< K_s = |grad R|^2 / 2R^2
  ScalarField reduced_potential;   ///< Q_r = -1/4 lap rho / rho
  ScalarField total_kinetic;       ///< K_c = K_a + K_s
  ScalarField particle_energy;     ///< E_p = -dS/dt
  ScalarField kinetic_bound;       ///< K_cl = E_p - U
  ScalarField potential;           ///< U
};

/// Discretization (h the spacing, D+/D- forward/backward differences):
///   total_kinetic density   k_c = 1/4 (|D+ Psi|^2 + |D- Psi|^2), per axis
///   flow_kinetic density    k_a = J^2 / 2 rho, J = Im(conj(Psi) D0 Psi)
///   symmetric density       k_s = k_c - k_a  (>= 0 by Cauchy-Schwarz)
///   reduced density         q_r = -1/4 lap rho (ghost-reflected edges)
///   quantum density         q   = k_s + q_r
/// In the interior q equals -1/2 Re(conj(Psi) lap Psi) - k_a exactly, which
/// is the product-rule expansion of -1/2 R lap R. So Q = K_s + Q_r and
/// K_c = K_a + K_s hold to rounding, and for a finite-difference eigenstate
/// sum(k_s + u) reproduces its eigenvalue.
struct EnergyDecomposition {
  Ledger per_particle;
  Ledger density;
  ScalarField rho;
  Mask valid;
  double band_limit;  ///< E_+
};

EnergyDecomposition energy_decomposition(const MadelungFields& f, const ScalarField& potential, double band_limit);

/// Convenience: fields of s at time t with the basis potential and band limit.
EnergyDecomposition decompose(const Superposition& s, double t, double eps = node_threshold);

/// Six region masks (1 = inside). Each comparison needs a margin of
/// 1e-12 * max(1, |E_+|); points on the boundary count as outside. Soft
/// regions use the kinetic form of the inequality (K_a > K_cl rather than
/// Q < 0, K_c > K_cl rather than Q_r < 0), which is equivalent through the
/// Hamilton-Jacobi relation and makes the set inclusions exact.
struct SuperoscillationMask {
  Mask soft;              ///< Q < 0
  Mask hard;              ///< K_a > E_+ - U
  Mask soft_reduced;      ///< Q_r < 0
  Mask hard_reduced;      ///< K_c > E_+ - U
  Mask forbidden_global;  ///< E_+ - U < 0
  Mask forbidden_local;   ///< K_cl < 0
  Mask valid;
};

SuperoscillationMask classify_superoscillation(const EnergyDecomposition& d);

/// Quadrature measure (length in 1D, area in 2D) of the set points of a mask.
double region_measure(const Grid& grid, const Mask& m);

/// K_a + Q + U - E_p on valid points.
ScalarField hj_residual(const EnergyDecomposition& d);

/// (rho(t + dt) - rho(t - dt)) / 2dt + div(rho v_a) at time t.
ScalarField continuity_residual(const Superposition& s, double t, double dt);

/// Largest |value| over valid points (0 if none).
double max_abs(const ScalarField& f);

}  // namespace madelung
