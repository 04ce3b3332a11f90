#include "madelung/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <mutex>
#include <sstream>
#include <thread>

#include "madelung/error.hpp"

namespace madelung {

namespace {

using std::numbers::pi;

[[noreturn]] void bad_config(const std::string& msg) { throw Error("config", msg); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  bad_config("key '" + key + "' expects a number, got '" + v + "'");
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d < 0 || d != std::floor(d)) bad_config("key '" + key + "' expects a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  bad_config("key '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<std::size_t> to_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_count(key, item));
  }
  return out;
}

// Key table: text name, setter, getter.
struct Key {
  const char* name;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

#define NUM(field)                                                                        \
  Key {                                                                                   \
    #field, [](ScenarioConfig& c, const std::string& v) { c.field = to_double(#field, v); }, \
        [](const ScenarioConfig& c) { return format_number(c.field); }                    \
  }
#define COUNT(field)                                                                     \
  Key {                                                                                  \
    #field, [](ScenarioConfig& c, const std::string& v) { c.field = to_count(#field, v); }, \
        [](const ScenarioConfig& c) { return std::to_string(c.field); }                  \
  }
#define TEXT(field) \
  Key { #field, [](ScenarioConfig& c, const std::string& v) { c.field = v; }, [](const ScenarioConfig& c) { return c.field; } }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      TEXT(name),
      TEXT(potential),
      NUM(half_width),
      NUM(barrier_height),
      NUM(barrier_width),
      NUM(omega),
      NUM(x_min),
      NUM(x_max),
      COUNT(grid_n),
      COUNT(modes),
      TEXT(recipe),
      Key{"states", [](ScenarioConfig& c, const std::string& v) { c.states = to_list("states", v); },
          [](const ScenarioConfig& c) {
            std::string s;
            for (std::size_t i = 0; i < c.states.size(); ++i) s += (i ? "," : "") + std::to_string(c.states[i]);
            return s;
          }},
      NUM(relative_phase_deg),
      NUM(packet_center),
      NUM(packet_momentum),
      NUM(packet_width),
      COUNT(target_index),
      NUM(eta),
      NUM(wall_guard),
      NUM(width_search_low),
      NUM(width_search_high),
      COUNT(packet_modes),
      COUNT(frames),
      NUM(t_begin),
      NUM(t_end),
      COUNT(streamlines),
      COUNT(stride),
      COUNT(node_time_samples),
      NUM(split_time),
      Key{"tune", [](ScenarioConfig& c, const std::string& v) { c.tune = to_bool("tune", v); },
          [](const ScenarioConfig& c) { return std::string(c.tune ? "true" : "false"); }},
      NUM(tune_tol),
      NUM(tune_guess),
      COUNT(tune_max_probes),
      NUM(vortex_r_max),
      COUNT(vortex_bins),
      COUNT(loops),
  };
  return table;
}

#undef NUM
#undef COUNT
#undef TEXT

complex unit_phase(double deg) {
  // exact values on the quarter turns keep real superpositions real
  const double r = std::fmod(std::fmod(deg, 360.0) + 360.0, 360.0);
  if (r == 0.0) return 1.0;
  if (r == 90.0) return complex(0.0, 1.0);
  if (r == 180.0) return -1.0;
  if (r == 270.0) return complex(0.0, -1.0);
  return std::polar(1.0, r * pi / 180.0);
}

}  // namespace

Potential scenario_potential(const ScenarioConfig& c, double height) {
  if (c.potential == "infinite_well") return InfiniteWell{c.half_width};
  if (c.potential == "well_with_barrier") return WellWithBarrier{c.half_width, height, c.barrier_width};
  if (c.potential == "harmonic") return Harmonic{c.omega};
  if (c.potential == "quartic_double_well") return QuarticDoubleWell{};
  bad_config("potential '" + c.potential + "' has no 1D eigenbasis");
}

namespace {

Grid1D axis_of(const ScenarioConfig& c) { return Grid1D(c.x_min, c.x_max, c.grid_n); }

std::vector<double> sample_times(double a, double b, std::size_t frames) {
  std::vector<double> t(frames + 1);
  for (std::size_t k = 0; k <= frames; ++k) t[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(frames);
  return t;
}

FrameSummary summarize(const Superposition& s, double t, std::size_t state, const EnergyDecomposition& d,
                       const SuperoscillationMask& m) {
  const Grid& g = d.rho.grid();
  FrameSummary f{};
  f.t = t;
  f.state = state;
  f.norm = integrate(d.rho);
  f.soft_area = region_measure(g, m.soft);
  f.hard_area = region_measure(g, m.hard);
  f.soft_reduced_area = region_measure(g, m.soft_reduced);
  f.hard_reduced_area = region_measure(g, m.hard_reduced);
  f.forbidden_global_area = region_measure(g, m.forbidden_global);
  f.forbidden_local_area = region_measure(g, m.forbidden_local);
  f.global_in_hard = f.local_in_soft = true;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (!m.valid[p]) continue;
    if (m.forbidden_global[p] && !m.hard[p]) f.global_in_hard = false;
    if (m.forbidden_local[p] && !m.soft[p]) f.local_in_soft = false;
  }
  // trapezoid sums: the difference operators sum by parts exactly against
  // them, also across the jumps of a step potential
  f.reduced_integral = integrate_trapezoid(d.density.reduced_potential);
  f.kinetic_potential_sum =
      (integrate_trapezoid(d.density.symmetric_kinetic) + integrate_trapezoid(d.density.potential)) /
      integrate_trapezoid(d.rho);
  f.particle_energy_integral = integrate(d.density.particle_energy);
  f.hj_max = max_abs(hj_residual(d));
  (void)s;
  return f;
}

Frame make_frame(const Superposition& s, double t, std::size_t state) {
  auto d = decompose(s, t);
  auto m = classify_superoscillation(d);
  auto summary = summarize(s, t, state, d, m);
  return {summary, std::move(d), std::move(m)};
}

// Frames are independent; each worker fills its own slots so the result does
// not depend on scheduling.
std::vector<Frame> frames_at(const Superposition& s, const std::vector<double>& times) {
  std::vector<std::optional<Frame>> slots(times.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto work = [&] {
    for (std::size_t k; (k = next++) < times.size();) {
      try {
        slots[k] = make_frame(s, times[k], 0);
      } catch (...) {
        std::lock_guard lock(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < std::min(workers, times.size()); ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<Frame> out;
  out.reserve(times.size());
  for (auto& f : slots) out.push_back(std::move(*f));
  return out;
}

double barrier_probability(const ComplexField& psi, double lo, double hi) {
  const auto& axis = psi.grid().axis(0);
  const auto w = quadrature_weights(axis);
  double p = 0.0;
  for (std::size_t i = 0; i < axis.size(); ++i)
    if (axis[i] >= lo && axis[i] <= hi) p += w[i] * std::norm(psi[i]);
  return p;
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"well_superposition", "well_barrier_superposition", "ho_eigenstates",  "ho_superposition", "quartic_eigenstates",
          "quartic_superposition", "reflection_pulse",        "mzi_1d",          "vortex_2d"};
}

ScenarioConfig default_config(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  if (name == "well_superposition" || name == "well_barrier_superposition") {
    const bool barrier = name == "well_barrier_superposition";
    c.potential = barrier ? "well_with_barrier" : "infinite_well";
    c.barrier_height = barrier ? 15.0 : 0.0;
    c.barrier_width = barrier ? 0.2 : 0.0;
    c.recipe = "pair";
    c.states = {0, 1};
    // the basis sign convention makes the second state -sin(pi x); this
    // reproduces cos(pi x / 2) + sin(pi x)
    c.relative_phase_deg = 180.0;
  } else if (name == "ho_eigenstates" || name == "ho_superposition") {
    c.potential = "harmonic";
    c.x_min = -2.5;
    c.x_max = 2.5;
    if (name == "ho_eigenstates") {
      c.recipe = "eigenstates";
      c.modes = 3;
      c.states = {0, 1, 2};
    } else {
      c.recipe = "pair";
      c.states = {0, 1};
    }
  } else if (name == "quartic_eigenstates" || name == "quartic_superposition") {
    c.potential = "quartic_double_well";
    c.x_min = -1.25;
    c.x_max = 1.25;
    if (name == "quartic_eigenstates") {
      c.recipe = "eigenstates";
      c.modes = 4;
      c.states = {0, 1, 2, 3};
    } else {
      c.recipe = "pair";
      c.states = {0, 1};
    }
  } else if (name == "reflection_pulse") {
    c.potential = "infinite_well";
    c.half_width = 0.5;
    c.x_min = -0.5;
    c.x_max = 0.5;
    c.modes = 60;
    c.recipe = "pulse";
    c.packet_momentum = 25.0;
    c.target_index = 18;
    c.wall_guard = 1e-3;
    c.width_search_low = 0.05;
    c.width_search_high = 0.12;
    c.packet_modes = 60;
    c.t_end = 0.04;  // out to the wall and back to the centre
  } else if (name == "mzi_1d") {
    c.potential = "well_with_barrier";
    c.half_width = 2.0;
    c.x_min = -2.0;
    c.x_max = 2.0;
    c.grid_n = 4001;
    c.barrier_width = 0.02;  // L/50 with L the unit length
    c.modes = 160;
    c.recipe = "pulse";
    c.packet_center = -1.0;
    c.packet_momentum = 60.0;
    c.target_index = 89;
    c.wall_guard = 5e-2;
    c.width_search_low = 0.2;
    c.width_search_high = 0.3;
    c.packet_modes = 120;
    c.t_end = 6.5 / 60.0;       // split, wall round trips, recombination
    c.split_time = 2.5 / 60.0;  // halves are clear of the barrier
    c.tune = true;
  } else if (name == "vortex_2d") {
    c.potential = "box";
    c.half_width = 0.5;
    c.x_min = 0.0;
    c.x_max = 1.0;
    c.grid_n = 201;
    c.recipe = "vortex";
    c.frames = 1;
    c.streamlines = 0;
  } else {
    bad_config("unknown scenario '" + name + "'");
  }
  return c;
}

void set_config_value(ScenarioConfig& c, const std::string& key, const std::string& value) {
  for (const auto& k : keys())
    if (key == k.name) {
      k.set(c, value);
      return;
    }
  bad_config("unknown config key '" + key + "'");
}

ScenarioConfig parse_config(const std::string& text, const std::string& fallback_name) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string name = fallback_name;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad_config("line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "name") name = value;
    entries.emplace_back(key, value);
  }
  if (name.empty()) bad_config("config does not name a scenario");
  auto c = default_config(name);
  for (const auto& [k, v] : entries) set_config_value(c, k, v);
  validate(c);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const ScenarioConfig& c) {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(c) + "\n";
  return out;
}

void validate(const ScenarioConfig& c) {
  if (c.grid_n < 5) bad_config("grid_n must be at least 5");
  if (!(c.x_max > c.x_min)) bad_config("x_max must exceed x_min");
  if (c.frames < 1) bad_config("frames must be at least 1");
  if (c.stride < 1) bad_config("stride must be at least 1");
  if (!(c.eta > 0 && c.eta < 1)) bad_config("eta must lie in (0, 1)");
  if (c.recipe == "pair" && c.states.size() != 2) bad_config("pair recipe needs exactly two states");
  if (c.recipe == "eigenstates" && c.states.empty()) bad_config("eigenstates recipe needs at least one state");
  if (c.recipe == "pair" || c.recipe == "eigenstates") {
    for (auto s : c.states)
      if (s >= c.modes) bad_config("state index " + std::to_string(s) + " is not below modes = " + std::to_string(c.modes));
    if (c.modes >= c.grid_n - 2) bad_config("modes must be below the number of interior grid points");
  }
  if (c.recipe == "pulse") {
    if (c.potential != "infinite_well" && c.potential != "well_with_barrier")
      bad_config("pulse recipe needs a well potential");
    if (c.packet_modes < 2) bad_config("pulse recipe needs packet_modes");
    if (!(c.t_end > c.t_begin)) bad_config("pulse recipe needs t_end > t_begin");
    if (c.packet_width == 0.0 && (c.target_index == 0 || !(c.width_search_high > c.width_search_low)))
      bad_config("width calibration needs target_index and a width search interval");
  }
  if (c.recipe == "vortex" && c.potential != "box") bad_config("vortex recipe needs the box potential");
  if (c.recipe != "pair" && c.recipe != "eigenstates" && c.recipe != "pulse" && c.recipe != "vortex")
    bad_config("unknown recipe '" + c.recipe + "'");
  if (c.tune && c.potential != "well_with_barrier") bad_config("tuning needs a barrier");
  if (c.tune && !(c.split_time > c.t_begin)) bad_config("tuning needs split_time");
  if (c.potential == "infinite_well" || c.potential == "well_with_barrier") {
    if (std::abs(c.x_min + c.half_width) > 1e-12 || std::abs(c.x_max - c.half_width) > 1e-12)
      bad_config("well grid must span [-half_width, half_width]");
  }
}

double transmission(const Superposition& s, double x_split, double t, double barrier_lo, double barrier_hi) {
  if (s.grid().dims() != 1) throw Error("precondition", "transmission needs a 1D state");
  const auto psi = s.evaluate(t);
  const double inside = barrier_probability(psi, barrier_lo, barrier_hi);
  if (inside >= 1e-4)
    throw Error("precondition", "packet has not cleared the barrier at t = " + format_number(t) +
                                    ": barrier holds probability " + format_number(inside));
  std::vector<double> rho(psi.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi[i]);
  return 1.0 - CumulativeDensity(ScalarField(s.grid(), std::move(rho)))(x_split);
}

Pulse make_pulse(const ScenarioConfig& c, EigenCache& cache) {
  const auto empty = cache.get(InfiniteWell{c.half_width}, axis_of(c), c.packet_modes);
  std::optional<WidthCalibration> cal;
  double width = c.packet_width;
  if (width == 0.0) {
    cal = calibrate_width(*empty, c.packet_center, c.packet_momentum, c.target_index, c.eta, c.width_search_low,
                          c.width_search_high);
    width = cal->width;
  }
  auto state = project_gaussian(empty, {c.packet_center, c.packet_momentum, width}, c.eta, c.wall_guard);
  return {std::move(state), cal};
}

Superposition reexpand(const Superposition& s, std::shared_ptr<const EigenBasis> target, double eta) {
  const auto all = project(*target, s.evaluate(0.0));
  const std::size_t kept = truncation_index(all, eta);
  double total = 0.0, norm = 0.0;
  for (const auto& v : all) total += std::norm(v);
  for (std::size_t n = 0; n < kept; ++n) norm += std::norm(all[n]);
  std::vector<std::size_t> idx(kept);
  std::vector<complex> coeffs(kept);
  for (std::size_t n = 0; n < kept; ++n) {
    idx[n] = n;
    coeffs[n] = all[n] / std::sqrt(norm);
  }
  TruncationInfo info{eta, kept, total - norm, 0.0, 0.0};
  if (s.truncation()) {
    info.wall_amplitude = s.truncation()->wall_amplitude;
    info.wall_guard = s.truncation()->wall_guard;
  }
  return Superposition(std::move(target), std::move(idx), std::move(coeffs), info);
}

namespace {

double probe_transmission(const ScenarioConfig& c, const Superposition& pulse, EigenCache& cache, double height) {
  const auto basis = cache.get(WellWithBarrier{c.half_width, height, c.barrier_width}, axis_of(c), c.modes);
  const auto s = reexpand(pulse, basis, c.eta);
  return transmission(s, 0.0, c.split_time, -0.5 * c.barrier_width, 0.5 * c.barrier_width);
}

}  // namespace

TuningResult tune_beam_splitter(const ScenarioConfig& c, EigenCache& cache) {
  if (c.potential != "well_with_barrier") throw Error("precondition", "beam splitter tuning needs a barrier well");
  const auto pulse = make_pulse(c, cache).state;
  // a delta barrier of strength U_0 w is 50/50 for U_0 w = p_0
  const double guess = c.tune_guess > 0 ? c.tune_guess : std::abs(c.packet_momentum) / c.barrier_width;
  TuningResult r{};
  auto probe = [&](double u) {
    if (r.probes.size() >= c.tune_max_probes) {
      std::string list;
      for (const auto& p : r.probes) list += " (" + format_number(p.height) + ", " + format_number(p.transmission) + ")";
      throw Error("convergence", "no 50/50 height within " + std::to_string(c.tune_max_probes) + " probes:" + list);
    }
    const double t = probe_transmission(c, pulse, cache, u);
    r.probes.push_back({u, t});
    return t;
  };
  auto finish = [&](double u, double t, double lo, double hi) {
    r.height = u;
    r.transmission = t;
    r.iterations = r.probes.size();
    r.bracket = {lo, hi};
    std::vector<TuningProbe> inside;
    for (const auto& p : r.probes)
      if (p.height >= lo && p.height <= hi) inside.push_back(p);
    std::sort(inside.begin(), inside.end(), [](const auto& a, const auto& b) { return a.height < b.height; });
    r.monotone = true;
    for (std::size_t i = 1; i < inside.size(); ++i)
      if (!(inside[i].transmission < inside[i - 1].transmission)) r.monotone = false;
    return r;
  };

  double t0 = probe(guess);
  if (std::abs(t0 - 0.5) < c.tune_tol) return finish(guess, t0, guess, guess);
  double lo = guess, hi = guess;
  if (t0 > 0.5) {
    do hi *= 2.0;
    while (probe(hi) > 0.5);
  } else {
    do lo *= 0.5;
    while (probe(lo) < 0.5);
  }
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    const double t = probe(mid);
    if (std::abs(t - 0.5) < c.tune_tol) return finish(mid, t, lo, hi);
    (t > 0.5 ? lo : hi) = mid;
  }
}

PreparedState prepare_state(const ScenarioConfig& c, EigenCache& cache) {
  validate(c);
  PreparedState p;
  if (c.recipe == "vortex") {
    const Grid g(Grid1D(c.x_min, c.x_max, c.grid_n), Grid1D(c.x_min, c.x_max, c.grid_n));
    p.basis = std::make_shared<const EigenBasis>(box_basis(g, {{1, 2}, {2, 1}}));
    const double s = 1.0 / std::sqrt(2.0);
    p.states.emplace_back(p.basis, std::vector<std::size_t>{0, 1}, std::vector<complex>{s, complex(0.0, s)});
    return p;
  }
  if (c.recipe == "eigenstates") {
    p.basis = cache.get(scenario_potential(c, c.barrier_height), axis_of(c), c.modes);
    for (auto n : c.states) p.states.push_back(eigenstate(p.basis, n));
    return p;
  }
  if (c.recipe == "pair") {
    p.basis = cache.get(scenario_potential(c, c.barrier_height), axis_of(c), c.modes);
    p.states.push_back(two_state(p.basis, c.states[0], c.states[1], unit_phase(c.relative_phase_deg)));
    return p;
  }
  auto pulse = make_pulse(c, cache);
  p.calibration = pulse.calibration;
  p.metrics["packet_width"] = p.calibration ? p.calibration->width : c.packet_width;
  if (p.calibration) {
    p.metrics["packet_width_window_low"] = p.calibration->window_low;
    p.metrics["packet_width_window_high"] = p.calibration->window_high;
  }
  p.metrics["packet_kept"] = static_cast<double>(pulse.state.truncation()->kept);
  p.metrics["packet_discarded_norm"] = pulse.state.truncation()->discarded_norm;
  p.metrics["packet_wall_amplitude"] = pulse.state.truncation()->wall_amplitude;
  if (c.potential == "well_with_barrier") {
    double height = c.barrier_height;
    if (c.tune) {
      p.tuning = tune_beam_splitter(c, cache);
      height = p.tuning->height;
    }
    p.basis = cache.get(WellWithBarrier{c.half_width, height, c.barrier_width}, axis_of(c), c.modes);
    p.states.push_back(reexpand(pulse.state, p.basis, c.eta));
    p.metrics["barrier_height"] = height;
    p.metrics["barrier_width_snapped"] = p.basis->metadata().at("barrier_width_snapped");
    p.metrics["barrier_kept"] = static_cast<double>(p.states.front().truncation()->kept);
    p.metrics["barrier_discarded_norm"] = p.states.front().truncation()->discarded_norm;
  } else {
    p.basis = pulse.state.basis_ptr();
    p.states.push_back(std::move(pulse.state));
  }
  return p;
}

std::vector<double> frame_times(const ScenarioConfig& c, const Superposition& s) {
  if (c.recipe == "vortex" || c.recipe == "eigenstates") return {c.t_begin};
  const double t_end = c.t_end > c.t_begin ? c.t_end : c.t_begin + s.period();
  if (!(t_end > c.t_begin)) throw Error("precondition", "stationary state needs an explicit t_end");
  return sample_times(c.t_begin, t_end, c.frames);
}

Frame analyze_frame(const Superposition& s, double t, std::size_t state) { return make_frame(s, t, state); }

std::vector<Frame> analyze_frames(const Superposition& s, const std::vector<double>& times) {
  return frames_at(s, times);
}

ScenarioResult run_scenario(const ScenarioConfig& c, EigenCache& cache) {
  auto prep = prepare_state(c, cache);
  ScenarioResult r;
  r.config = c;
  r.basis = prep.basis;
  r.states = std::move(prep.states);
  r.calibration = prep.calibration;
  r.tuning = prep.tuning;
  r.metrics = std::move(prep.metrics);
  const auto& st = r.states.front();

  if (c.recipe == "vortex") {
    r.times = {c.t_begin};
    r.frames.push_back(make_frame(st, c.t_begin, 0));
    const auto nodes = find_nodes_2d(st, c.t_begin);
    if (nodes.size() != 1) throw Error("convergence", "expected one vortex node, found " + std::to_string(nodes.size()));
    const auto centre = nodes.front();
    r.metrics["node_x"] = centre[0];
    r.metrics["node_y"] = centre[1];
    r.vortex = vortex_profile(st, centre, c.vortex_r_max, c.vortex_bins, c.t_begin);
    r.metrics["fit_exponent"] = r.vortex->fit_exponent;
    r.metrics["fit_Z"] = r.vortex->fit_Z;
    const double radius = 0.5 * c.vortex_r_max;
    const double quarter = 0.75 * c.x_min + 0.25 * c.x_max;
    r.metrics["circulation_node"] = circulation(st, centre, radius, c.t_begin);
    r.metrics["circulation_off_node"] = circulation(st, {quarter, quarter}, radius, c.t_begin);
    // energy of every fluid element
    double dev = 0.0;
    const auto& ep = r.frames.front().ledger.per_particle.particle_energy;
    for (std::size_t p = 0; p < ep.size(); ++p)
      if (ep.valid(p)) dev = std::max(dev, std::abs(ep[p] - st.band_limit()));
    r.metrics["particle_energy_max_deviation"] = dev;
    r.metrics["energy"] = st.band_limit();
    // loops seeded above the node on the vertical symmetry axis at equal
    // probability steps of the density restricted to that axis
    if (c.loops > 0) {
      const Grid& g = r.basis->grid();
      const std::size_t i = g.axis(0).nearest(centre[0]);
      const std::size_t jc = g.axis(1).nearest(centre[1]);
      const std::size_t count = g.extent(1) - jc;
      const Grid half(Grid1D(g.axis(1)[jc], c.x_max, count));
      const auto psi = st.evaluate(c.t_begin);
      std::vector<double> rho(count);
      for (std::size_t j = 0; j < count; ++j) rho[j] = std::norm(psi[g.index(i, jc + j)]);
      for (double y : seed_quantiles(ScalarField(half, std::move(rho)), c.loops))
        r.loops.push_back(trace_loop(st, {centre[0], y}, centre, c.t_begin));
    }
    return r;
  }

  if (c.recipe == "eigenstates") {
    r.times = {c.t_begin};
    for (std::size_t k = 0; k < r.states.size(); ++k) {
      r.frames.push_back(make_frame(r.states[k], c.t_begin, c.states[k]));
      r.metrics["energy_" + std::to_string(c.states[k])] = r.basis->energy(c.states[k]);
    }
    return r;
  }

  r.times = frame_times(c, st);
  r.metrics["band_limit"] = st.band_limit();
  if (c.recipe == "pair") {
    r.period = st.period();
    r.node_window = {c.t_begin - 0.25 * r.period, c.t_begin + 0.75 * r.period};
    r.metrics["period"] = r.period;
    r.metrics["energy_low"] = r.basis->energy(c.states[0]);
    r.metrics["energy_high"] = r.basis->energy(c.states[1]);
  } else {
    r.node_window = {c.t_begin, c.t_end};
    if (c.potential == "well_with_barrier") {
      if (c.split_time > c.t_begin)
        r.metrics["transmission"] =
            transmission(st, 0.0, c.split_time, -0.5 * c.barrier_width, 0.5 * c.barrier_width);
      const double left = probability_left_of(st, 0.0, c.t_end);
      r.metrics["final_launch_side"] = c.packet_center < 0 ? left : 1.0 - left;
      r.metrics["final_far_side"] = c.packet_center < 0 ? 1.0 - left : left;
    }
  }

  r.frames = frames_at(st, r.times);
  if (c.streamlines > 0) r.streamlines = streamline_bundle(st, c.streamlines, r.times);
  NodeSearch ns;
  ns.time_samples = c.node_time_samples;
  r.nodes = find_nodes(st, r.node_window[0], r.node_window[1], c.x_min, c.x_max, ns);
  std::size_t isolated = 0;
  for (const auto& e : r.nodes) isolated += e.isolated && e.refined;
  r.metrics["node_events"] = static_cast<double>(isolated);
  return r;
}

}  // namespace madelung
