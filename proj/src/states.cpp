#include "madelung/states.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "madelung/error.hpp"

namespace madelung {

namespace {

using std::numbers::pi;

[[noreturn]] void precondition(const std::string& msg) { throw Error("precondition", msg); }

complex phase_factor(double energy, double t) { return std::polar(1.0, -energy * t); }

complex raw_packet(const WavepacketSpec& p, double x) {
  const double d = x - p.center;
  const double amp = std::pow(2 * pi * p.width * p.width, -0.25) * std::exp(-d * d / (4 * p.width * p.width));
  return amp * std::polar(1.0, p.momentum * d);
}

double well_half_width(const EigenBasis& basis) {
  const auto& g = basis.grid();
  if (g.dims() != 1) precondition("packet projection needs a 1D basis");
  const double a = 0.5 * (g.axis(0).x_max() - g.axis(0).x_min());
  if (std::abs(g.axis(0).x_min() + a) > 1e-12 * std::max(1.0, a))
    precondition("packet projection needs a well centred at the origin");
  return a;
}

std::vector<complex> packet_coefficients(const EigenBasis& basis, const WavepacketSpec& packet) {
  const double a = well_half_width(basis);
  const auto& axis = basis.grid().axis(0);
  std::vector<complex> v(axis.size());
  for (std::size_t i = 0; i < axis.size(); ++i) v[i] = wall_compatible_packet(packet, a, axis[i]);
  v.front() = v.back() = 0.0;
  return project(basis, ComplexField(basis.grid(), std::move(v)));
}

}  // namespace

Superposition::Superposition(std::shared_ptr<const EigenBasis> basis, std::vector<std::size_t> indices,
                             std::vector<complex> coeffs, std::optional<TruncationInfo> truncation)
    : basis_(std::move(basis)), indices_(std::move(indices)), coeffs_(std::move(coeffs)), truncation_(truncation) {
  if (!basis_) precondition("superposition needs a basis");
  if (indices_.empty()) precondition("superposition needs at least one state");
  if (indices_.size() != coeffs_.size()) precondition("superposition indices and coefficients differ in length");
  double norm = 0.0;
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (indices_[k] >= basis_->size())
      precondition("superposition index " + std::to_string(indices_[k]) + " is not in the basis");
    norm += std::norm(coeffs_[k]);
  }
  if (std::abs(norm - 1.0) > 1e-10)
    precondition("superposition coefficients have squared norm " + format_number(norm) + ", expected 1");
}

ComplexField Superposition::evaluate(double t) const {
  const std::size_t n = grid().size();
  std::vector<complex> v(n, 0.0);
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    const complex c = coeffs_[k] * phase_factor(basis_->energy(indices_[k]), t);
    const auto& psi = basis_->state(indices_[k]);
    for (std::size_t p = 0; p < n; ++p) v[p] += c * psi[p];
  }
  return ComplexField(grid(), std::move(v));
}

ComplexField Superposition::time_derivative(double t) const {
  const std::size_t n = grid().size();
  std::vector<complex> v(n, 0.0);
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    const double e = basis_->energy(indices_[k]);
    const complex c = complex(0.0, -e) * coeffs_[k] * phase_factor(e, t);
    const auto& psi = basis_->state(indices_[k]);
    for (std::size_t p = 0; p < n; ++p) v[p] += c * psi[p];
  }
  return ComplexField(grid(), std::move(v));
}

Superposition::Point Superposition::evaluate_at(double x, double y, double t) const {
  Point out{0.0, {0.0, 0.0}, 0.0};
  const bool sampled = basis_->kind() == BasisKind::Numerical;
  std::optional<CubicStencil> st;
  if (sampled) st = cubic_stencil(grid().axis(0), x);
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    const std::size_t idx = indices_[k];
    const double e = basis_->energy(idx);
    const complex c = coeffs_[k] * phase_factor(e, t);
    PointValue pv;
    if (sampled) {
      const auto& f = basis_->state(idx);
      for (std::size_t q = 0; q < 4; ++q) {
        pv.value += st->value[q] * f[st->first + q];
        pv.grad[0] += st->slope[q] * f[st->first + q];
      }
    } else {
      pv = basis_->evaluate(idx, x, y);
    }
    out.value += c * pv.value;
    out.grad[0] += c * pv.grad[0];
    out.grad[1] += c * pv.grad[1];
    out.dt += complex(0.0, -e) * c * pv.value;
  }
  return out;
}

double Superposition::band_limit() const {
  double e = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < indices_.size(); ++k)
    if (std::abs(coeffs_[k]) > 0) e = std::max(e, basis_->energy(indices_[k]));
  return e;
}

double Superposition::mean_energy() const {
  double e = 0.0;
  for (std::size_t k = 0; k < indices_.size(); ++k) e += std::norm(coeffs_[k]) * basis_->energy(indices_[k]);
  return e;
}

double Superposition::period() const {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (std::abs(coeffs_[k]) == 0) continue;
    lo = std::min(lo, basis_->energy(indices_[k]));
    hi = std::max(hi, basis_->energy(indices_[k]));
  }
  return hi > lo ? 2 * pi / (hi - lo) : 0.0;
}

Superposition eigenstate(std::shared_ptr<const EigenBasis> basis, std::size_t index) {
  return Superposition(std::move(basis), {index}, {1.0});
}

Superposition two_state(std::shared_ptr<const EigenBasis> basis, std::size_t i, std::size_t j, complex phase) {
  if (i == j) precondition("two-state superposition needs distinct states");
  if (std::abs(std::abs(phase) - 1.0) > 1e-12) precondition("relative phase must have unit modulus");
  const double s = 1.0 / std::sqrt(2.0);
  return Superposition(std::move(basis), {i, j}, {s, s * phase});
}

complex wall_compatible_packet(const WavepacketSpec& packet, double half_width, double x) {
  const double a = half_width;
  return raw_packet(packet, x) - raw_packet(packet, -2 * a - x) - raw_packet(packet, 2 * a - x);
}

double wall_amplitude(const WavepacketSpec& packet, double half_width) {
  const double peak = std::abs(raw_packet(packet, packet.center));
  return std::max(std::abs(raw_packet(packet, -half_width)), std::abs(raw_packet(packet, half_width))) / peak;
}

std::vector<complex> project(const EigenBasis& basis, const ComplexField& f) {
  if (!(f.grid() == basis.grid())) precondition("projected field lives on a different grid");
  const auto w = quadrature_weights(basis.grid());
  std::vector<complex> c(basis.size());
  for (std::size_t n = 0; n < basis.size(); ++n) {
    const auto& psi = basis.state(n);
    double re = 0.0, im = 0.0;
    for (std::size_t p = 0; p < w.size(); ++p) {
      re += w[p] * psi[p] * f[p].real();
      im += w[p] * psi[p] * f[p].imag();
    }
    if (std::abs(re) < 1e-14) re = 0.0;
    if (std::abs(im) < 1e-14) im = 0.0;
    c[n] = {re, im};
  }
  return c;
}

std::size_t truncation_index(const std::vector<complex>& coeffs, double eta) {
  if (!(eta > 0 && eta < 1)) precondition("truncation threshold must lie in (0, 1)");
  double peak = 0.0;
  for (const auto& c : coeffs) peak = std::max(peak, std::abs(c));
  if (peak == 0.0) precondition("all coefficients vanish");
  std::size_t last = 0;
  for (std::size_t n = 0; n < coeffs.size(); ++n)
    if (std::abs(coeffs[n]) >= eta * peak) last = n;
  if (last + 1 == coeffs.size())
    precondition("basis of " + std::to_string(coeffs.size()) + " states is too small to resolve the cutoff");
  return last + 1;
}

Superposition project_gaussian(std::shared_ptr<const EigenBasis> basis, const WavepacketSpec& packet, double eta,
                               double max_wall_amplitude) {
  if (!(packet.width > 0)) precondition("packet width must be positive");
  const double a = well_half_width(*basis);
  if (std::abs(packet.center) >= a) precondition("packet centre lies outside the well");
  const double leak = wall_amplitude(packet, a);
  if (leak > max_wall_amplitude) {
    // probability of the raw packet outside the well
    const double s = std::sqrt(2.0) * packet.width;
    const double outside = 0.5 * std::erfc((a - packet.center) / s) + 0.5 * std::erfc((a + packet.center) / s);
    throw Error("precondition", "packet leaks out of the well: wall amplitude " + format_number(leak) +
                                    " exceeds " + format_number(max_wall_amplitude) + ", leaked norm " +
                                    format_number(outside));
  }
  const auto all = packet_coefficients(*basis, packet);
  const std::size_t kept = truncation_index(all, eta);
  double total = 0.0, norm = 0.0;
  for (const auto& c : all) total += std::norm(c);
  for (std::size_t n = 0; n < kept; ++n) norm += std::norm(all[n]);
  std::vector<std::size_t> idx(kept);
  std::vector<complex> coeffs(kept);
  const double scale = 1.0 / std::sqrt(norm);
  for (std::size_t n = 0; n < kept; ++n) {
    idx[n] = n;
    coeffs[n] = all[n] * scale;
  }
  TruncationInfo info{eta, kept, total - norm, leak, max_wall_amplitude};
  return Superposition(std::move(basis), std::move(idx), std::move(coeffs), info);
}

WidthCalibration calibrate_width(const EigenBasis& basis, double center, double momentum, std::size_t target_index,
                                 double eta, double width_low, double width_high) {
  if (!(width_low > 0 && width_high > width_low)) precondition("width search interval is empty");
  auto index_at = [&](double w) { return truncation_index(packet_coefficients(basis, {center, momentum, w}), eta); };
  // Coarse sweep for a width that hits the target, then bisect both edges of
  // the window (the index falls as the packet widens).
  constexpr int samples = 64;
  std::optional<double> hit;
  double below = width_low, above = width_high;
  for (int s = 0; s <= samples; ++s) {
    const double w = width_low + (width_high - width_low) * s / samples;
    const std::size_t idx = index_at(w);
    if (idx > target_index) below = w;
    if (idx == target_index && !hit) hit = w;
    if (idx < target_index) {
      above = w;
      break;
    }
  }
  if (!hit)
    throw Error("calibration", "no packet width in [" + format_number(width_low) + ", " + format_number(width_high) +
                                   "] truncates at index " + std::to_string(target_index));
  auto edge = [&](double outside, double inside) {
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (outside + inside);
      (index_at(mid) == target_index ? inside : outside) = mid;
    }
    return inside;
  };
  const double lo = index_at(below) == target_index ? below : edge(below, *hit);
  const double hi = index_at(above) == target_index ? above : edge(above, *hit);
  return {0.5 * (lo + hi), lo, hi};
}

}  // namespace madelung
