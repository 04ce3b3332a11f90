#pragma once

// Fluid kinematics: probability quantiles, streamlines in (x, t), node
// events, and the radial structure of a 2D vortex.

#include <array>
#include <optional>
#include <vector>

#include "madelung/grid.hpp"
#include "madelung/madelung.hpp"
#include "madelung/states.hpp"

namespace madelung {

/// Cumulative integral of a sampled 1D density, normalized to end at 1.
/// Inside a cell the density is taken as linear, so the CDF is a monotone
/// piecewise quadratic.
class CumulativeDensity {
 public:
  explicit CumulativeDensity(const ScalarField& rho);

  double operator()(double x) const;
  /// x with cdf(x) = q, by bisection.
  double quantile(double q) const;
  double total() const noexcept { return total_; }

 private:
  Grid1D axis_;
  std::vector<double> rho_;
  std::vector<double> cum_;
  double total_;
};

/// x_i with CDF(x_i) = i / (m + 1), i = 1..m.
std::vector<double> seed_quantiles(const ScalarField& rho, std::size_t m);

/// Position holding probability q to its left at time t.
double quantile_position(const Superposition& s, double q, double t);
/// Probability left of x at time t.
double probability_left_of(const Superposition& s, double x, double t);

/// v_a = Im(conj(Psi) dPsi/dx) / |Psi|^2 at a point (1D).
double flow_velocity(const Superposition& s, double x, double t);

struct StreamlineSample {
  double t;
  double x;
};

struct Streamline {
  double seed_quantile = 0.0;
  std::vector<StreamlineSample> samples;
  bool halted = false;      ///< stopped early next to a node
  std::size_t steps = 0;     ///< accepted steps
  std::size_t rejected = 0;  ///< rejected steps
};

struct StreamlineOptions {
  double tol = 1e-8;              ///< absolute local error in x
  double node_eps = node_threshold;  ///< halts where rho < 10 * node_eps * max rho(t0)
  double max_step = 0.0;          ///< 0: no limit beyond the output spacing
};

/// Integrates dx/dt = v_a(x, t) with the Dormand-Prince 5(4) pair, recording
/// x at each of the (increasing) output times. The first output time is the
/// start. Throws if x0 starts in a node neighbourhood or at a wall.
Streamline integrate_streamline(const Superposition& s, double x0, const std::vector<double>& times,
                                const StreamlineOptions& opt = {});

/// One streamline per seed quantile, all started at times.front().
std::vector<Streamline> streamline_bundle(const Superposition& s, std::size_t count,
                                          const std::vector<double>& times,
                                          const StreamlineOptions& opt = {});

struct NodeEvent {
  double t;
  double x;
  bool refined;   ///< Newton converged to |Psi| < 1e-8 max|Psi|
  bool isolated;  ///< false for a node line that persists through the window
  double residual = 0.0;  ///< |Psi| / max|Psi| at the reported point
};

struct NodeSearch {
  std::size_t time_samples = 256;   ///< lattice rows across the window
  std::size_t space_samples = 400;  ///< lattice columns across the window
  double candidate_level = 1e-2;    ///< rho / max rho below which minima are refined
};

/// Zeros of Psi(x, t) with t in [t_begin, t_end) and x in [x_lo, x_hi]: local
/// minima of |Psi|^2 on a lattice, refined by Newton on (Re Psi, Im Psi) in
/// (x, t) using the exact time dependence. Minima present at (nearly) every
/// lattice time at one position are reported once as a non-isolated line.
std::vector<NodeEvent> find_nodes(const Superposition& s, double t_begin, double t_end, double x_lo, double x_hi,
                                  const NodeSearch& opt = {});

/// Spatial zeros of a 2D state at time t, refined by Newton in (x, y).
std::vector<std::array<double, 2>> find_nodes_2d(const Superposition& s, double t, double candidate_level = 1e-2);

struct VortexProfile {
  std::array<double, 2> center;
  std::vector<double> radii;              ///< mean radius of each bin
  std::vector<std::size_t> counts;        ///< grid points per bin
  std::vector<double> quantum_potential;  ///< bin mean of Q
  std::vector<double> flow_kinetic;       ///< bin mean of K_a
  std::vector<double> speed;              ///< bin mean of |v_a|
  std::vector<double> energy_residual;    ///< bin mean of Q + K_a + U - E_p
  double fit_exponent;                    ///< p in K_a ~ C r^p
  double fit_Z;                           ///< 2 C
};

/// Angular averages on radial bins over [2h, r_max] around a node of a 2D
/// state, and a least-squares power-law fit of K_a.
VortexProfile vortex_profile(const Superposition& s, std::array<double, 2> center, double r_max, std::size_t bins,
                             double t = 0.0);

/// Line integral of v_a around a circle (counter-clockwise), from the exact
/// point evaluation of the state.
double circulation(const Superposition& s, std::array<double, 2> center, double radius, double t = 0.0,
                   std::size_t points = 2048);

/// Closed fluid path of a stationary 2D flow through `start`, traced until it
/// has wound once around `center`.
std::vector<std::array<double, 2>> trace_loop(const Superposition& s, std::array<double, 2> start,
                                              std::array<double, 2> center, double t = 0.0, double tol = 1e-9);

}  // namespace madelung
