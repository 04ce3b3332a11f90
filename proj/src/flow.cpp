#include "madelung/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "madelung/error.hpp"

namespace madelung {

namespace {

using std::numbers::pi;

// Dormand-Prince 5(4) tableau
constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double b5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double b4[7] = {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

template <std::size_t D>
using Vec = std::array<double, D>;

template <std::size_t D>
struct StepResult {
  Vec<D> y;
  double error;
  bool finite;
};

// One embedded step; the caller decides acceptance.
template <std::size_t D, typename F>
StepResult<D> dp_step(const F& f, double t, const Vec<D>& y, double h) {
  Vec<D> k[7];
  for (int s = 0; s < 7; ++s) {
    Vec<D> ys = y;
    for (int r = 0; r < s; ++r)
      for (std::size_t d = 0; d < D; ++d) ys[d] += h * a[s][r] * k[r][d];
    k[s] = f(t + c[s] * h, ys);
  }
  StepResult<D> out{y, 0.0, true};
  for (std::size_t d = 0; d < D; ++d) {
    double err = 0.0;
    for (int s = 0; s < 7; ++s) {
      out.y[d] += h * b5[s] * k[s][d];
      err += h * (b5[s] - b4[s]) * k[s][d];
      if (!std::isfinite(k[s][d])) out.finite = false;
    }
    out.error = std::max(out.error, std::abs(err));
  }
  return out;
}

double step_factor(double err, double tol) {
  if (err == 0.0) return 5.0;
  return std::clamp(0.9 * std::pow(tol / err, 0.2), 0.2, 5.0);
}

double max_density(const ComplexField& psi) {
  double m = 0.0;
  for (auto v : psi.values()) m = std::max(m, std::norm(v));
  return m;
}

void require_1d(const Superposition& s, const char* what) {
  if (s.grid().dims() != 1) throw Error("precondition", std::string(what) + " needs a 1D state");
}

ScalarField density_at(const Superposition& s, double t) {
  const auto psi = s.evaluate(t);
  std::vector<double> rho(psi.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi[i]);
  return ScalarField(s.grid(), std::move(rho));
}

}  // namespace

CumulativeDensity::CumulativeDensity(const ScalarField& rho) : axis_(rho.grid().axis(0)) {
  if (rho.grid().dims() != 1) throw Error("precondition", "cumulative density needs a 1D field");
  rho_.assign(rho.values().begin(), rho.values().end());
  cum_.assign(rho_.size(), 0.0);
  const double h = axis_.spacing();
  for (std::size_t i = 1; i < rho_.size(); ++i) {
    if (!(rho_[i] >= 0.0)) throw Error("precondition", "density is negative or not finite at index " + std::to_string(i));
    cum_[i] = cum_[i - 1] + 0.5 * h * (rho_[i - 1] + rho_[i]);
  }
  total_ = cum_.back();
  if (!(total_ > 0.0)) throw Error("precondition", "density has no mass");
}

double CumulativeDensity::operator()(double x) const {
  if (x <= axis_.x_min()) return 0.0;
  if (x >= axis_.x_max()) return 1.0;
  const std::size_t i = axis_.cell(x);
  const double h = axis_.spacing();
  const double s = x - axis_[i];
  const double slope = (rho_[i + 1] - rho_[i]) / h;
  return (cum_[i] + rho_[i] * s + 0.5 * slope * s * s) / total_;
}

double CumulativeDensity::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw Error("precondition", "quantile must lie in (0, 1)");
  double lo = axis_.x_min(), hi = axis_.x_max();
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    ((*this)(mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> seed_quantiles(const ScalarField& rho, std::size_t m) {
  if (m < 1) throw Error("precondition", "need at least one seed");
  const CumulativeDensity cdf(rho);
  std::vector<double> x(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = cdf.quantile(static_cast<double>(i + 1) / static_cast<double>(m + 1));
  return x;
}

double quantile_position(const Superposition& s, double q, double t) {
  require_1d(s, "quantile position");
  return CumulativeDensity(density_at(s, t)).quantile(q);
}

double probability_left_of(const Superposition& s, double x, double t) {
  require_1d(s, "probability");
  return CumulativeDensity(density_at(s, t))(x);
}

double flow_velocity(const Superposition& s, double x, double t) {
  const auto p = s.evaluate_at(x, t);
  return std::imag(std::conj(p.value) * p.grad[0]) / std::norm(p.value);
}

Streamline integrate_streamline(const Superposition& s, double x0, const std::vector<double>& times,
                                const StreamlineOptions& opt) {
  require_1d(s, "streamline");
  if (times.empty()) throw Error("precondition", "streamline needs output times");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw Error("precondition", "streamline output times must increase");
  const auto& axis = s.grid().axis(0);
  const double h_grid = axis.spacing();
  const double rho_floor = 10.0 * opt.node_eps * max_density(s.evaluate(times.front()));
  auto density = [&](double x, double t) { return std::norm(s.evaluate_at(x, t).value); };
  auto inside = [&](double x) { return x > axis.x_min() + 2 * h_grid && x < axis.x_max() - 2 * h_grid; };
  if (!inside(x0) || density(x0, times.front()) < rho_floor)
    throw Error("precondition", "streamline starts in a masked region at x = " + format_number(x0));

  auto rhs = [&](double t, const Vec<1>& y) -> Vec<1> {
    if (!inside(y[0])) return {std::numeric_limits<double>::quiet_NaN()};
    return {flow_velocity(s, y[0], t)};
  };

  Streamline line;
  line.samples.push_back({times.front(), x0});
  Vec<1> y{x0};
  double t = times.front();
  double h = (times.size() > 1 ? times[1] - times[0] : 1.0) * 0.01;
  const double span = times.back() - times.front();
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double target = times[k];
    while (t < target) {
      double step = std::min(h, target - t);
      if (opt.max_step > 0) step = std::min(step, opt.max_step);
      const auto r = dp_step<1>(rhs, t, y, step);
      if (!r.finite || !inside(r.y[0])) {
        ++line.rejected;
        h = 0.25 * step;
      } else if (r.error <= opt.tol) {
        const bool clipped = step < h;
        t = (step == target - t) ? target : t + step;
        y = r.y;
        ++line.steps;
        // a step shortened to land on an output time says nothing about h
        h = clipped ? std::max(h, step * step_factor(r.error, opt.tol)) : step * step_factor(r.error, opt.tol);
        if (density(y[0], t) < rho_floor) {
          line.halted = true;
          line.samples.push_back({t, y[0]});
          return line;
        }
      } else {
        ++line.rejected;
        h = step * step_factor(r.error, opt.tol);
      }
      if (h < 1e-14 * std::max(1.0, span)) {
        line.halted = true;
        line.samples.push_back({t, y[0]});
        return line;
      }
    }
    line.samples.push_back({target, y[0]});
  }
  return line;
}

std::vector<Streamline> streamline_bundle(const Superposition& s, std::size_t count, const std::vector<double>& times,
                                          const StreamlineOptions& opt) {
  const auto seeds = seed_quantiles(density_at(s, times.front()), count);
  std::vector<Streamline> out;
  for (std::size_t i = 0; i < count; ++i) {
    auto line = integrate_streamline(s, seeds[i], times, opt);
    line.seed_quantile = static_cast<double>(i + 1) / static_cast<double>(count + 1);
    out.push_back(std::move(line));
  }
  return out;
}

std::vector<NodeEvent> find_nodes(const Superposition& s, double t_begin, double t_end, double x_lo, double x_hi,
                                  const NodeSearch& opt) {
  require_1d(s, "node search");
  const auto& axis = s.grid().axis(0);
  if (!(t_end > t_begin) || !(x_hi > x_lo) || x_lo < axis.x_min() || x_hi > axis.x_max())
    throw Error("precondition", "node search window must be non-empty and inside the domain");
  const std::size_t M = std::max<std::size_t>(opt.time_samples, 4);
  const double dt = (t_end - t_begin) / static_cast<double>(M);
  const std::size_t first = axis.nearest(x_lo), last = axis.nearest(x_hi);
  const std::size_t stride = std::max<std::size_t>(1, (last - first) / std::max<std::size_t>(opt.space_samples, 4));
  std::vector<std::size_t> cols;
  for (std::size_t i = first; i <= last; i += stride) cols.push_back(i);
  const double dx = stride * axis.spacing();

  // lattice rows j = 0..M+2 sit at t_begin + (j - 1) dt
  const std::size_t rows = M + 3, nc = cols.size();
  std::vector<double> rho(rows * nc);
  double peak = 0.0;
  for (std::size_t j = 0; j < rows; ++j) {
    const auto psi = s.evaluate(t_begin + (static_cast<double>(j) - 1.0) * dt);
    for (std::size_t i = 0; i < nc; ++i) {
      rho[j * nc + i] = std::norm(psi[cols[i]]);
      peak = std::max(peak, rho[j * nc + i]);
    }
  }
  const double amp_peak = std::sqrt(peak);

  struct Candidate {
    std::size_t j, i;
  };
  std::vector<Candidate> cand;
  for (std::size_t j = 1; j + 1 < rows; ++j)
    for (std::size_t i = 1; i + 1 < nc; ++i) {
      const double v = rho[j * nc + i];
      if (!(v < opt.candidate_level * peak)) continue;
      bool minimum = true;
      for (int dj = -1; dj <= 1 && minimum; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (dj == 0 && di == 0) continue;
          const double w = rho[(j + dj) * nc + (i + di)];
          // strict on one side so plateaus give a single candidate
          if (w < v || (w == v && (dj < 0 || (dj == 0 && di < 0)))) {
            minimum = false;
            break;
          }
        }
      if (minimum) cand.push_back({j, i});
    }

  std::vector<NodeEvent> events;
  // node lines: a column (give or take one) is a minimum in nearly every row
  std::vector<std::size_t> per_column(nc, 0);
  for (std::size_t j = 1; j + 1 < rows; ++j)
    for (std::size_t i = 1; i + 1 < nc; ++i) {
      const double v = rho[j * nc + i];
      if (v < opt.candidate_level * peak && v <= rho[j * nc + i - 1] && v < rho[j * nc + i + 1]) ++per_column[i];
    }
  std::vector<std::size_t> line_cols;
  for (std::size_t i = 1; i + 1 < nc; ++i) {
    const std::size_t nearby = per_column[i - 1] + per_column[i] + per_column[i + 1];
    const bool best = per_column[i] > per_column[i - 1] && per_column[i] >= per_column[i + 1];
    if (best && nearby * 10 >= 9 * (rows - 2)) line_cols.push_back(i);
  }
  auto on_line = [&](std::size_t i) {
    for (auto l : line_cols)
      if (i + 1 >= l && i <= l + 1) return true;
    return false;
  };
  for (auto l : line_cols) {
    // bisection on d rho / dx between the neighbouring columns
    auto slope = [&](double x) {
      const auto p = s.evaluate_at(x, t_begin);
      return std::real(std::conj(p.value) * p.grad[0]);
    };
    double lo = axis[cols[l - 1]], hi = axis[cols[l + 1]];
    const bool ok = slope(lo) < 0 && slope(hi) > 0;
    if (ok)
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) < 0 ? lo : hi) = mid;
      }
    const double x = ok ? 0.5 * (lo + hi) : axis[cols[l]];
    const double res = std::abs(s.evaluate_at(x, t_begin).value) / amp_peak;
    events.push_back({t_begin, x, ok && res < 1e-8, false, res});
  }

  for (const auto& c : cand) {
    if (on_line(c.i)) continue;
    double x = axis[cols[c.i]];
    double t = t_begin + (static_cast<double>(c.j) - 1.0) * dt;
    const double x_start = x, t_start = t;
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      const auto p = s.evaluate_at(x, t);
      if (std::abs(p.value) < 1e-13 * amp_peak) {
        converged = true;
        break;
      }
      const double j11 = p.grad[0].real(), j12 = p.dt.real(), j21 = p.grad[0].imag(), j22 = p.dt.imag();
      const double det = j11 * j22 - j12 * j21;
      if (det == 0.0 || !std::isfinite(det)) break;
      const double sx = (p.value.real() * j22 - p.value.imag() * j12) / det;
      const double st = (j11 * p.value.imag() - j21 * p.value.real()) / det;
      x -= sx;
      t -= st;
      if (std::abs(x - x_start) > 4 * dx || std::abs(t - t_start) > 4 * dt || !axis.contains(x)) break;
    }
    double res = std::abs(s.evaluate_at(x, t).value) / amp_peak;
    converged = converged || res < 1e-8;
    if (!converged) {
      x = x_start;
      t = t_start;
      res = std::sqrt(rho[c.j * nc + c.i] / peak);
    }
    if (t < t_begin || t >= t_end || x < x_lo || x > x_hi) continue;
    bool duplicate = false;
    for (const auto& e : events)
      if (e.isolated && std::abs(e.x - x) < 2 * dx && std::abs(e.t - t) < 2 * dt) duplicate = true;
    if (!duplicate) events.push_back({t, x, converged, true, res});
  }
  std::sort(events.begin(), events.end(), [](const NodeEvent& l, const NodeEvent& r) {
    return l.t != r.t ? l.t < r.t : l.x < r.x;
  });
  return events;
}

std::vector<std::array<double, 2>> find_nodes_2d(const Superposition& s, double t, double candidate_level) {
  const Grid& g = s.grid();
  if (g.dims() != 2) throw Error("precondition", "2D node search needs a 2D state");
  const auto psi = s.evaluate(t);
  const double peak = max_density(psi);
  const std::size_t nx = g.extent(0), ny = g.extent(1);
  std::vector<std::array<double, 2>> nodes;
  for (std::size_t i = 1; i + 1 < nx; ++i)
    for (std::size_t j = 1; j + 1 < ny; ++j) {
      const double v = std::norm(psi[g.index(i, j)]);
      if (!(v < candidate_level * peak)) continue;
      bool minimum = true;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const double w = std::norm(psi[g.index(i + di, j + dj)]);
          if (w < v || (w == v && (di < 0 || (di == 0 && dj < 0)))) minimum = false;
        }
      if (!minimum) continue;
      auto pos = g.position(g.index(i, j));
      double x = pos[0], y = pos[1];
      for (int it = 0; it < 50; ++it) {
        const auto p = s.evaluate_at(x, y, t);
        if (std::abs(p.value) < 1e-14 * std::sqrt(peak)) break;
        const double j11 = p.grad[0].real(), j12 = p.grad[1].real(), j21 = p.grad[0].imag(), j22 = p.grad[1].imag();
        const double det = j11 * j22 - j12 * j21;
        if (det == 0.0) break;
        x -= (p.value.real() * j22 - p.value.imag() * j12) / det;
        y -= (j11 * p.value.imag() - j21 * p.value.real()) / det;
      }
      bool duplicate = false;
      for (const auto& n : nodes)
        if (std::hypot(n[0] - x, n[1] - y) < 2 * g.min_spacing()) duplicate = true;
      if (!duplicate) nodes.push_back({x, y});
    }
  return nodes;
}

VortexProfile vortex_profile(const Superposition& s, std::array<double, 2> center, double r_max, std::size_t bins,
                             double t) {
  const Grid& g = s.grid();
  if (g.dims() != 2) throw Error("precondition", "vortex profile needs a 2D state");
  if (bins < 2) throw Error("precondition", "vortex profile needs at least two bins");
  const double h = g.min_spacing();
  const double room = std::min({center[0] - g.axis(0).x_min(), g.axis(0).x_max() - center[0],
                                center[1] - g.axis(1).x_min(), g.axis(1).x_max() - center[1]});
  if (r_max > room) throw Error("precondition", "profile radius " + format_number(r_max) + " reaches the boundary");
  const double r_min = 2 * h;
  if (!(r_max > r_min)) throw Error("precondition", "profile radius is below the stencil floor 2h");

  const auto d = decompose(s, t);
  const auto& pp = d.per_particle;
  const auto f = polar_fields(s.evaluate(t), s.time_derivative(t));
  std::vector<double> r_sum(bins, 0.0), q(bins, 0.0), ka(bins, 0.0), sp(bins, 0.0), res(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  const double width = (r_max - r_min) / static_cast<double>(bins);
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (!d.valid[p]) continue;
    const auto pos = g.position(p);
    const double r = std::hypot(pos[0] - center[0], pos[1] - center[1]);
    if (r < r_min || r > r_max) continue;
    const std::size_t b = std::min(bins - 1, static_cast<std::size_t>((r - r_min) / width));
    r_sum[b] += r;
    q[b] += pp.quantum_potential[p];
    ka[b] += pp.flow_kinetic[p];
    sp[b] += std::hypot(f.grad_phase[0][p], f.grad_phase[1][p]);
    res[b] += pp.flow_kinetic[p] + pp.quantum_potential[p] + pp.potential[p] - pp.particle_energy[p];
    ++count[b];
  }
  VortexProfile out{center, {}, {}, {}, {}, {}, {}, 0.0, 0.0};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    const double n = static_cast<double>(count[b]);
    out.radii.push_back(r_sum[b] / n);
    out.counts.push_back(count[b]);
    out.quantum_potential.push_back(q[b] / n);
    out.flow_kinetic.push_back(ka[b] / n);
    out.speed.push_back(sp[b] / n);
    out.energy_residual.push_back(res[b] / n);
    const double lx = std::log(r_sum[b] / n), ly = std::log(ka[b] / n);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) throw Error("precondition", "too few populated radial bins for a fit");
  const double mm = static_cast<double>(m);
  out.fit_exponent = (mm * sxy - sx * sy) / (mm * sxx - sx * sx);
  out.fit_Z = 2.0 * std::exp((sy - out.fit_exponent * sx) / mm);
  return out;
}

double circulation(const Superposition& s, std::array<double, 2> center, double radius, double t, std::size_t points) {
  if (s.grid().dims() != 2) throw Error("precondition", "circulation needs a 2D state");
  double sum = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    const double th = 2 * pi * (static_cast<double>(k) + 0.5) / static_cast<double>(points);
    const auto p = s.evaluate_at(center[0] + radius * std::cos(th), center[1] + radius * std::sin(th), t);
    const double rho = std::norm(p.value);
    const double vx = std::imag(std::conj(p.value) * p.grad[0]) / rho;
    const double vy = std::imag(std::conj(p.value) * p.grad[1]) / rho;
    sum += -vx * std::sin(th) + vy * std::cos(th);
  }
  return sum * 2 * pi * radius / static_cast<double>(points);
}

std::vector<std::array<double, 2>> trace_loop(const Superposition& s, std::array<double, 2> start,
                                              std::array<double, 2> center, double t, double tol) {
  if (s.grid().dims() != 2) throw Error("precondition", "loop tracing needs a 2D state");
  auto rhs = [&](double, const Vec<2>& y) -> Vec<2> {
    const auto p = s.evaluate_at(y[0], y[1], t);
    const double rho = std::norm(p.value);
    return {std::imag(std::conj(p.value) * p.grad[0]) / rho, std::imag(std::conj(p.value) * p.grad[1]) / rho};
  };
  auto angle = [&](const Vec<2>& y) { return std::atan2(y[1] - center[1], y[0] - center[0]); };
  std::vector<std::array<double, 2>> path{start};
  Vec<2> y = start;
  const double r0 = std::hypot(start[0] - center[0], start[1] - center[1]);
  const auto v0 = rhs(0.0, y);
  double h = 0.01 * r0 / std::max(1e-12, std::hypot(v0[0], v0[1]));
  double wound = 0.0, tau = 0.0;
  for (std::size_t it = 0; it < 200000; ++it) {
    const auto r = dp_step<2>(rhs, tau, y, h);
    if (!r.finite) {
      h *= 0.25;
      continue;
    }
    if (r.error <= tol) {
      double da = angle(r.y) - angle(y);
      if (da > pi) da -= 2 * pi;
      if (da < -pi) da += 2 * pi;
      wound += da;
      tau += h;
      y = r.y;
      path.push_back(y);
      if (std::abs(wound) >= 2 * pi) {
        path.push_back(start);
        return path;
      }
    }
    h *= step_factor(r.error, tol);
    // keep the polyline smooth enough to draw
    const auto v = rhs(0.0, y);
    h = std::min(h, 0.05 * r0 / std::max(1e-12, std::hypot(v[0], v[1])));
  }
  throw Error("convergence", "fluid path did not close around the node");
}

}  // namespace madelung
