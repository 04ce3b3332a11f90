#pragma once

// Preset configurations for the worked examples, the run that turns one into
// frames / streamlines / node events, transmission measurement and the 50/50
// beam-splitter tuner.

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "madelung/flow.hpp"
#include "madelung/madelung.hpp"
#include "madelung/spectral.hpp"
#include "madelung/states.hpp"

namespace madelung {

/// Flat key/value description of a run. Text form: one `key = value` per
/// line, `#` starts a comment. Unset keys take the preset defaults.
struct ScenarioConfig {
  std::string name;  ///< preset: well_superposition, ..., vortex_2d

  // geometry
  std::string potential;  ///< infinite_well | well_with_barrier | harmonic | quartic_double_well | box
  double half_width = 1.0;
  double barrier_height = 0.0;
  double barrier_width = 0.0;
  double omega = 10.0;
  double x_min = -1.0;
  double x_max = 1.0;
  std::size_t grid_n = 2001;  ///< points per axis
  std::size_t modes = 2;      ///< eigenstates solved for the evolution basis

  // state recipe
  std::string recipe;                  ///< eigenstates | pair | pulse | vortex
  std::vector<std::size_t> states;     ///< basis indices (eigenstates / pair)
  double relative_phase_deg = 0.0;     ///< pair: psi_a + e^{i phase} psi_b
  double packet_center = 0.0;
  double packet_momentum = 0.0;
  double packet_width = 0.0;           ///< 0: calibrate against target_index
  std::size_t target_index = 0;
  double eta = 1e-3;
  double wall_guard = 1e-10;
  double width_search_low = 0.0;
  double width_search_high = 0.0;
  std::size_t packet_modes = 0;        ///< empty-well basis size for the projection

  // time sampling and outputs
  std::size_t frames = 64;
  double t_begin = 0.0;
  double t_end = 0.0;  ///< 0: one period
  std::size_t streamlines = 9;
  std::size_t stride = 4;  ///< spatial subsampling of frames.csv
  std::size_t node_time_samples = 256;

  // pulse measurements and tuning
  double split_time = 0.0;  ///< when transmission is read
  bool tune = false;
  double tune_tol = 0.01;
  double tune_guess = 0.0;
  std::size_t tune_max_probes = 30;

  // vortex
  double vortex_r_max = 0.1;
  std::size_t vortex_bins = 18;
  std::size_t loops = 6;
};

std::vector<std::string> scenario_names();
ScenarioConfig default_config(const std::string& name);
/// Parses a config text on top of the defaults of its `name` (or of
/// `fallback_name` when the text does not set one).
ScenarioConfig parse_config(const std::string& text, const std::string& fallback_name = "");
ScenarioConfig load_config(const std::filesystem::path& path);
/// Canonical text form, every key written.
std::string to_text(const ScenarioConfig& c);
/// Sets one key from its text value (used by the parser and CLI overrides).
void set_config_value(ScenarioConfig& c, const std::string& key, const std::string& value);
void validate(const ScenarioConfig& c);

/// Probability right of x_split at time t. Throws if the barrier footprint
/// [barrier_lo, barrier_hi] still holds 1e-4 or more.
double transmission(const Superposition& s, double x_split, double t, double barrier_lo, double barrier_hi);

struct TuningProbe {
  double height;
  double transmission;
};

struct TuningResult {
  double height;  ///< U_0*
  double transmission;
  std::size_t iterations;  ///< probes used
  std::array<double, 2> bracket;
  bool monotone;  ///< T decreasing in U_0 over the probes inside the final bracket
  std::vector<TuningProbe> probes;
};

/// Band-limited pulse of a config: the wall-compatible packet projected onto
/// the empty well and truncated (width calibrated when the config leaves it 0).
struct Pulse {
  Superposition state;
  std::optional<WidthCalibration> calibration;
};
Pulse make_pulse(const ScenarioConfig& c, EigenCache& cache);

/// A state re-expanded in another basis on the same grid, truncated at eta
/// and renormalized.
Superposition reexpand(const Superposition& s, std::shared_ptr<const EigenBasis> target, double eta);

/// Bisection on the barrier height until |T - 0.5| < tol. Each probe solves
/// the barrier well and re-projects the pulse.
TuningResult tune_beam_splitter(const ScenarioConfig& c, EigenCache& cache);

struct FrameSummary {
  double t;
  std::size_t state;  ///< basis index for eigenstate snapshots, else 0
  double norm;
  double soft_area, hard_area, soft_reduced_area, hard_reduced_area, forbidden_global_area, forbidden_local_area;
  bool global_in_hard;  ///< {E_+ - U < 0} within hard on valid points
  bool local_in_soft;   ///< {K_cl < 0} within soft on valid points
  double reduced_integral;       ///< trapezoid integral of q_r
  double kinetic_potential_sum;  ///< trapezoid integral of k_s + u over that of rho
  double particle_energy_integral;
  double hj_max;  ///< max |K_a + Q + U - E_p| over valid points
};

struct Frame {
  FrameSummary summary;
  EnergyDecomposition ledger;
  SuperoscillationMask masks;
};

struct ScenarioResult {
  ScenarioConfig config;
  std::shared_ptr<const EigenBasis> basis;
  std::vector<Superposition> states;  ///< one per snapshot (eigenstates) or a single evolving state
  std::vector<Frame> frames;
  std::vector<double> times;
  std::vector<Streamline> streamlines;
  std::vector<NodeEvent> nodes;
  std::array<double, 2> node_window{0.0, 0.0};
  double period = 0.0;
  std::optional<WidthCalibration> calibration;
  std::optional<TuningResult> tuning;
  std::optional<VortexProfile> vortex;
  std::vector<std::vector<std::array<double, 2>>> loops;
  std::map<std::string, double> metrics;  ///< scalar results (transmission, circulation, ...)
};

/// Potential of a config with the barrier height given explicitly (the tuner
/// varies it). Throws for the 2D box, whose basis is analytic.
Potential scenario_potential(const ScenarioConfig& c, double height);

/// Basis and state(s) of a config: one state per snapshot for the
/// eigenstates recipe, else a single evolving state. Pulses are calibrated,
/// projected and (for the barrier well) tuned and re-expanded here.
struct PreparedState {
  std::shared_ptr<const EigenBasis> basis;
  std::vector<Superposition> states;
  std::optional<WidthCalibration> calibration;
  std::optional<TuningResult> tuning;
  std::map<std::string, double> metrics;
};
PreparedState prepare_state(const ScenarioConfig& c, EigenCache& cache);

/// Uniform frame times from t_begin to t_end (one period when t_end is 0).
std::vector<double> frame_times(const ScenarioConfig& c, const Superposition& s);

Frame analyze_frame(const Superposition& s, double t, std::size_t state = 0);
/// Frames are computed in parallel; the result is in time order.
std::vector<Frame> analyze_frames(const Superposition& s, const std::vector<double>& times);

ScenarioResult run_scenario(const ScenarioConfig& c, EigenCache& cache);

/// Writes config.txt, manifest.json, frames.csv, streamlines.csv, nodes.json,
/// state.json and (2D) vortex_profile.csv / loops.csv, plus the SVG figures.
/// Returns the written file names in order.
std::vector<std::string> write_scenario(const ScenarioResult& r, const std::filesystem::path& dir);

}  // namespace madelung
