#pragma once

// Potentials, the finite-difference Hamiltonian and its lowest eigenpairs,
// plus closed-form eigenstates for the infinite well, the harmonic
// oscillator and the 2D square box.

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "madelung/grid.hpp"

namespace madelung {

/// Infinite square well with walls at -half_width and +half_width.
struct InfiniteWell {
  double half_width = 1.0;
};

/// Infinite well with a centred rectangular barrier of the given height.
struct WellWithBarrier {
  double half_width = 1.0;
  double height = 15.0;
  double width = 0.2;
};

/// U = omega^2 x^2 / 2.
struct Harmonic {
  double omega = 10.0;
};

/// U = 240 x^4 - 120 x^2 + 15: minima U(+-1/2) = 0, central hump U(0) = 15.
struct QuarticDoubleWell {};

/// Arbitrary sampled potential, linearly interpolated between samples.
struct Tabulated {
  std::vector<double> x;
  std::vector<double> u;
};

using Potential = std::variant<InfiniteWell, WellWithBarrier, Harmonic, QuarticDoubleWell, Tabulated>;

/// Potential at a point; walls are not represented (0 inside a well).
double potential_value(const Potential& p, double x);
/// Short kind tag ("infinite_well", "harmonic", ...).
std::string potential_kind(const Potential& p);
/// Canonical one-line description, used for hashing and metadata.
std::string describe(const Potential& p);

/// Barrier footprint after snapping both edges to the nearest grid points.
struct BarrierSnap {
  std::size_t first;  ///< first grid index inside the barrier
  std::size_t last;   ///< last grid index inside the barrier
  double width;       ///< x[last] - x[first]
};
BarrierSnap snap_barrier(const WellWithBarrier& b, const Grid1D& grid);

/// Samples the potential on the grid (barrier edges snapped). Wells require
/// the grid to span exactly the well.
ScalarField sample_potential(const Potential& p, const Grid1D& grid);

/// Symmetric tridiagonal matrix.
struct SymTridiag {
  std::vector<double> diagonal;
  std::vector<double> off_diagonal;  ///< diagonal.size() - 1 entries

  std::size_t size() const noexcept { return diagonal.size(); }
  /// y = H x
  std::vector<double> apply(std::span<const double> x) const;
};

/// -1/2 * (3-point Laplacian) + U on the interior points, Dirichlet at both
/// grid ends. Row i corresponds to grid point i + 1.
SymTridiag build_hamiltonian(const Potential& p, const Grid1D& grid);

/// Lowest k eigenpairs of a symmetric tridiagonal matrix: Sturm-sequence
/// bisection for the values, inverse iteration for the vectors. Vectors have
/// unit Euclidean norm and the sign convention of the basis builders.
struct TridiagEigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};
TridiagEigen solve_tridiagonal(const SymTridiag& h, std::size_t k);

enum class BasisKind { Numerical, AnalyticWell, AnalyticHarmonic, AnalyticBox };

std::string to_string(BasisKind k);

/// Value and gradient of one basis function at a point.
struct PointValue {
  double value = 0.0;
  std::array<double, 2> grad{0.0, 0.0};
};

/// Parameters of the closed-form families, unused for numerical bases.
struct AnalyticParams {
  double half_width = 0.0;                 // well
  double omega = 0.0;                      // harmonic
  std::array<double, 2> origin{0.0, 0.0};  // box corner
  std::array<double, 2> length{1.0, 1.0};  // box side lengths
};

/// Energies and orthonormal real eigenfunctions on a grid.
///
/// Sign convention: scanning from x_min, the first component whose magnitude
/// exceeds 1e-8 of the state's maximum is positive.
class EigenBasis {
 public:
  using Analytic = AnalyticParams;

  EigenBasis(BasisKind kind, Grid grid, std::vector<double> energies,
             std::vector<ScalarField> states, std::vector<std::array<int, 2>> labels,
             std::optional<Potential> potential, Analytic analytic = {},
             std::map<std::string, double> metadata = {});

  BasisKind kind() const noexcept { return kind_; }
  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return energies_.size(); }
  double energy(std::size_t i) const { return energies_.at(i); }
  const std::vector<double>& energies() const noexcept { return energies_; }
  const ScalarField& state(std::size_t i) const { return states_.at(i); }
  /// Quantum numbers: {n, 0} in 1D (n from 1 for wells, from 0 for the
  /// oscillator and numerical bases), {nx, ny} for the box.
  const std::array<int, 2>& label(std::size_t i) const { return labels_.at(i); }
  const std::optional<Potential>& potential() const noexcept { return potential_; }
  const Analytic& analytic() const noexcept { return analytic_; }
  const std::map<std::string, double>& metadata() const noexcept { return metadata_; }

  /// Potential sampled on the basis grid (zero inside walls).
  ScalarField potential_field() const;

  /// State i and its gradient at an arbitrary point: exact for the analytic
  /// families, 4-point cubic interpolation of the samples otherwise.
  PointValue evaluate(std::size_t i, double x, double y = 0.0) const;

 private:
  BasisKind kind_;
  Grid grid_;
  std::vector<double> energies_;
  std::vector<ScalarField> states_;
  std::vector<std::array<int, 2>> labels_;
  std::optional<Potential> potential_;
  Analytic analytic_;
  std::map<std::string, double> metadata_;
};

/// n-th infinite-well state (n >= 1) on a grid spanning [-a, a]:
/// E_n = n^2 pi^2 / (8 a^2).
struct EnergyState {
  double energy;
  ScalarField state;
};
EnergyState analytic_infinite_well(int n, double half_width, const Grid1D& grid);
/// n-th oscillator state (n >= 0), E_n = (n + 1/2) omega. Throws if the
/// state is not below 1e-12 at both grid ends.
EnergyState analytic_harmonic(int n, double omega, const Grid1D& grid);

/// Bases made of the closed-form states n = 1..count (well) or 0..count-1
/// (oscillator).
EigenBasis well_basis(double half_width, const Grid1D& grid, std::size_t count);
EigenBasis harmonic_basis(double omega, const Grid1D& grid, std::size_t count);
/// Products of box states sqrt(2/Lx) sin(nx pi (x-x0)/Lx) * (same in y) on a
/// 2D grid spanning the box, in the given order of (nx, ny).
EigenBasis box_basis(const Grid& grid, const std::vector<std::array<int, 2>>& labels);

/// Finite-difference eigenbasis with the k lowest states.
EigenBasis solve_eigen(const SymTridiag& h, std::size_t k, const Grid1D& grid,
                       const Potential& potential);
EigenBasis numerical_basis(const Potential& potential, const Grid1D& grid, std::size_t k);

/// JSON file with energies and labels next to a CSV holding the states
/// (columns x, psi_0, psi_1, ...). The CSV is written as <stem>_states.csv.
void save_basis(const EigenBasis& basis, const std::filesystem::path& json_path);
EigenBasis load_basis(const std::filesystem::path& json_path);

/// Memoizes numerical eigenbases by (potential, grid, k). If a directory is
/// given (default: $MADELUNG_CACHE_DIR when set), bases are also persisted.
class EigenCache {
 public:
  EigenCache();
  explicit EigenCache(std::optional<std::filesystem::path> dir);

  std::shared_ptr<const EigenBasis> get(const Potential& potential, const Grid1D& grid,
                                        std::size_t k);
  std::size_t solves() const noexcept { return solves_; }
  std::size_t hits() const noexcept { return hits_; }

  static std::string key(const Potential& potential, const Grid1D& grid, std::size_t k);

 private:
  std::optional<std::filesystem::path> dir_;
  std::map<std::string, std::shared_ptr<const EigenBasis>> memo_;
  std::size_t solves_ = 0;
  std::size_t hits_ = 0;
  std::mutex mutex_;
};

}  // namespace madelung
