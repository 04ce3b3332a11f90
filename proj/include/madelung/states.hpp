#pragma once

// Superpositions over an eigenbasis with exact time evolution, and
// band-limited Gaussian pulses obtained by projection and truncation.

#include <array>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "madelung/grid.hpp"
#include "madelung/spectral.hpp"

namespace madelung {

using complex = std::complex<double>;

/// How a projected state was cut down to a band-limited one.
struct TruncationInfo {
  double eta = 0.0;              ///< relative coefficient threshold
  std::size_t kept = 0;          ///< number of leading basis states kept
  double discarded_norm = 0.0;   ///< sum of |c_n|^2 dropped before renormalizing
  double wall_amplitude = 0.0;   ///< raw packet amplitude at the walls / its peak
  double wall_guard = 0.0;       ///< guard the wall amplitude was checked against
};

/// Psi(x, t) = sum_n c_n psi_n(x) exp(-i E_n t) over a subset of a basis.
class Superposition {
 public:
  Superposition(std::shared_ptr<const EigenBasis> basis, std::vector<std::size_t> indices,
                std::vector<complex> coeffs, std::optional<TruncationInfo> truncation = std::nullopt);

  const EigenBasis& basis() const noexcept { return *basis_; }
  const std::shared_ptr<const EigenBasis>& basis_ptr() const noexcept { return basis_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  const std::vector<complex>& coeffs() const noexcept { return coeffs_; }
  const std::optional<TruncationInfo>& truncation() const noexcept { return truncation_; }
  const Grid& grid() const noexcept { return basis_->grid(); }

  ComplexField evaluate(double t) const;
  /// Exact dPsi/dt = -i sum c_n E_n psi_n exp(-i E_n t).
  ComplexField time_derivative(double t) const;

  /// Value, spatial gradient and time derivative at one point.
  struct Point {
    complex value;
    std::array<complex, 2> grad;
    complex dt;
  };
  Point evaluate_at(double x, double y, double t) const;
  Point evaluate_at(double x, double t) const { return evaluate_at(x, 0.0, t); }

  /// Largest energy among states with a nonzero coefficient.
  double band_limit() const;
  /// sum |c_n|^2 E_n
  double mean_energy() const;
  /// 2 pi / (E_max - E_min) over the participating states; 0 if stationary.
  double period() const;

 private:
  std::shared_ptr<const EigenBasis> basis_;
  std::vector<std::size_t> indices_;
  std::vector<complex> coeffs_;
  std::optional<TruncationInfo> truncation_;
};

/// Single basis state with unit coefficient.
Superposition eigenstate(std::shared_ptr<const EigenBasis> basis, std::size_t index);
/// (psi_i + phase * psi_j) / sqrt(2).
Superposition two_state(std::shared_ptr<const EigenBasis> basis, std::size_t i, std::size_t j,
                        complex phase = 1.0);

/// exp(i p0 (x - x0)) exp(-(x - x0)^2 / (4 sigma^2)), normalized on the line.
struct WavepacketSpec {
  double center = 0.0;
  double momentum = 0.0;
  double width = 0.1;
};

/// The packet with its mirror images in both walls of a well of half-width
/// a subtracted, so that it vanishes at the walls.
complex wall_compatible_packet(const WavepacketSpec& packet, double half_width, double x);

/// Raw packet amplitude at the nearer wall relative to its peak.
double wall_amplitude(const WavepacketSpec& packet, double half_width);

/// c_n = integral psi_n f for every basis state; |c_n| < 1e-14 is set to 0.
std::vector<complex> project(const EigenBasis& basis, const ComplexField& f);

/// Number of leading states kept at relative threshold eta: the largest n
/// with |c_n| >= eta * max |c|. Throws if that is the last basis state (the
/// basis is too small to resolve the cutoff).
std::size_t truncation_index(const std::vector<complex>& coeffs, double eta);

/// Projects the wall-compatible packet onto a well basis, keeps the leading
/// states up to the truncation index and renormalizes. Throws if the raw
/// packet amplitude at the walls exceeds max_wall_amplitude.
Superposition project_gaussian(std::shared_ptr<const EigenBasis> basis, const WavepacketSpec& packet,
                               double eta = 1e-3, double max_wall_amplitude = 1e-10);

/// Interval of packet widths whose truncation index equals the target, and
/// its midpoint.
struct WidthCalibration {
  double width;
  double window_low;
  double window_high;
};
WidthCalibration calibrate_width(const EigenBasis& basis, double center, double momentum,
                                 std::size_t target_index, double eta, double width_low,
                                 double width_high);

/// JSON text describing a superposition (basis reference, indices,
/// coefficients, truncation).
std::string to_json(const Superposition& s);

}  // namespace madelung
