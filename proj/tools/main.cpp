// madelung: command-line front end. Each subcommand resolves a scenario
// config, calls the library and writes its files; errors go to stderr as one
// JSON object.

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "madelung/error.hpp"
#include "madelung/output.hpp"
#include "madelung/render.hpp"
#include "madelung/scenarios.hpp"

namespace fs = std::filesystem;
using namespace madelung;

namespace {

struct Common {
  std::string config_path;
  std::string name;
  std::string out;
  std::vector<std::string> sets;
  std::optional<std::size_t> grid_n;
  std::optional<std::size_t> frames;
  std::optional<double> eta;
  std::optional<double> tol;
};

void add_common(CLI::App* app, Common& c, bool needs_out) {
  app->add_option("--config", c.config_path, "scenario config file (key = value lines)")->check(CLI::ExistingFile);
  app->add_option("--name,--scenario", c.name, "preset scenario name");
  auto* out = app->add_option("--out", c.out, "output directory");
  if (needs_out) out->required();
  app->add_option("--set", c.sets, "override a config key: key=value (repeatable)");
  app->add_option("--grid-n", c.grid_n, "grid points per axis");
  app->add_option("--frames", c.frames, "frames per run");
  app->add_option("--eta", c.eta, "relative coefficient cutoff");
  app->add_option("--tol", c.tol, "beam-splitter tolerance on |T - 0.5|");
}

ScenarioConfig resolve(const Common& c) {
  if (c.config_path.empty() == c.name.empty()) throw Error("config", "give exactly one of --config or --name");
  ScenarioConfig cfg = c.config_path.empty() ? default_config(c.name) : load_config(c.config_path);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("config", "--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.grid_n) cfg.grid_n = *c.grid_n;
  if (c.frames) cfg.frames = *c.frames;
  if (c.eta) cfg.eta = *c.eta;
  if (c.tol) cfg.tune_tol = *c.tol;
  validate(cfg);
  return cfg;
}

fs::path out_dir(const Common& c) {
  fs::create_directories(c.out);
  return c.out;
}

void wrote(const fs::path& p) { std::cout << "wrote " << p.string() << '\n'; }

std::array<double, 2> parse_range(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw Error("config", "range expects lo,hi, got '" + s + "'");
  try {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw Error("config", "range expects two numbers, got '" + s + "'");
  }
}

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Madelung quantum-hydrodynamics lab"};
  app.require_subcommand(1);
  EigenCache cache;

  Common eigen_opt, evolve_opt, fields_opt, classify_opt, stream_opt, vortex_opt, tune_opt, scenario_opt;
  std::optional<double> evolve_time, fields_time, classify_time;

  auto* eigen = app.add_subcommand("eigen", "solve the eigenbasis of a scenario");
  add_common(eigen, eigen_opt, false);
  auto* evolve = app.add_subcommand("evolve", "write Psi(x, t) at the frame times");
  add_common(evolve, evolve_opt, true);
  evolve->add_option("--time", evolve_time, "single time instead of the frame grid");
  auto* fields = app.add_subcommand("fields", "write the energy ledger fields");
  add_common(fields, fields_opt, true);
  fields->add_option("--time", fields_time, "single time instead of the frame grid");
  auto* classify = app.add_subcommand("classify", "superoscillation regions per frame");
  add_common(classify, classify_opt, true);
  classify->add_option("--time", classify_time, "single time instead of the frame grid");
  auto* stream = app.add_subcommand("streamlines", "integrate streamlines and find nodes");
  add_common(stream, stream_opt, true);
  auto* vortex = app.add_subcommand("vortex", "radial profile, circulation and loops of a 2D node");
  add_common(vortex, vortex_opt, true);
  auto* tune = app.add_subcommand("tune", "tune the barrier height to a 50/50 split");
  add_common(tune, tune_opt, false);
  auto* scenario = app.add_subcommand("scenario", "run a scenario and write its directory");
  add_common(scenario, scenario_opt, true);

  std::string run_dir, render_out, kind = "streamlines", shading = "qka", x_range, y_range;
  std::optional<std::size_t> frame;
  auto* render = app.add_subcommand("render", "draw an SVG figure from a run directory");
  render->add_option("--run", run_dir, "run directory written by `scenario`")->required()->check(CLI::ExistingDirectory);
  render->add_option("--kind", kind, "streamlines | densities | potential_landscape | vortex")
      ->check(CLI::IsMember({"streamlines", "densities", "potential_landscape", "vortex"}));
  render->add_option("--shading", shading, "qka | qrkc")->check(CLI::IsMember({"qka", "qrkc"}));
  render->add_option("--frame", frame, "frame index for snapshot figures");
  render->add_option("--x-range", x_range, "lo,hi");
  render->add_option("--y-range", y_range, "lo,hi");
  render->add_option("--out", render_out, "output SVG path (default: <run>/<kind>_<shading>.svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*eigen) {
      const auto c = resolve(eigen_opt);
      std::shared_ptr<const EigenBasis> basis;
      if (c.recipe == "vortex")
        basis = prepare_state(c, cache).basis;
      else
        basis = cache.get(scenario_potential(c, c.barrier_height), Grid1D(c.x_min, c.x_max, c.grid_n),
                          std::max<std::size_t>(c.modes, c.packet_modes));
      for (std::size_t n = 0; n < basis->size(); ++n) std::cout << "E[" << n << "] = " << format_number(basis->energy(n)) << '\n';
      if (!eigen_opt.out.empty()) {
        const auto dir = out_dir(eigen_opt);
        if (c.recipe != "vortex") {
          save_basis(*basis, dir / "basis.json");
          wrote(dir / "basis.json");
        }
        std::string csv = "n,energy\n";
        for (std::size_t n = 0; n < basis->size(); ++n) csv += std::to_string(n) + "," + format_number(basis->energy(n)) + "\n";
        write_text(dir / "energies.csv", csv);
        wrote(dir / "energies.csv");
      }
    } else if (*evolve) {
      const auto c = resolve(evolve_opt);
      const auto prep = prepare_state(c, cache);
      const auto dir = out_dir(evolve_opt);
      const auto times = evolve_time ? std::vector<double>{*evolve_time} : frame_times(c, prep.states.front());
      for (std::size_t s = 0; s < prep.states.size(); ++s)
        for (std::size_t k = 0; k < times.size(); ++k) {
          std::ostringstream csv;
          write_csv(csv, prep.states[s].evaluate(times[k]));
          const auto name = prep.states.size() > 1 ? "psi_" + std::to_string(c.states[s]) + "_" + std::to_string(k) + ".csv"
                                                   : "psi_" + std::to_string(k) + ".csv";
          write_text(dir / name, csv.str());
        }
      std::cout << "wrote " << prep.states.size() * times.size() << " wavefunction files to " << dir.string() << '\n';
      std::string states = "[\n";
      for (std::size_t s = 0; s < prep.states.size(); ++s) states += (s ? ",\n" : "") + to_json(prep.states[s]);
      write_text(dir / "state.json", states + "\n]\n");
      wrote(dir / "state.json");
    } else if (*fields || *classify) {
      const auto& opt = *fields ? fields_opt : classify_opt;
      const auto& when = *fields ? fields_time : classify_time;
      const auto c = resolve(opt);
      const auto prep = prepare_state(c, cache);
      const auto dir = out_dir(opt);
      std::vector<Frame> frames;
      if (prep.states.size() > 1) {
        for (std::size_t s = 0; s < prep.states.size(); ++s)
          frames.push_back(analyze_frame(prep.states[s], when.value_or(c.t_begin), c.states[s]));
      } else {
        const auto times = when ? std::vector<double>{*when} : frame_times(c, prep.states.front());
        frames = analyze_frames(prep.states.front(), times);
      }
      if (*fields) {
        write_text(dir / "fields.csv", frames_csv(frames, c.stride));
        wrote(dir / "fields.csv");
      } else {
        bool inclusions = true;
        for (const auto& f : frames) inclusions = inclusions && f.summary.global_in_hard && f.summary.local_in_soft;
        std::cout << frames.size() << " frames, forbidden regions inside hard/soft: " << (inclusions ? "yes" : "no") << '\n';
      }
      write_text(dir / "summaries.json", summaries_json(frames));
      wrote(dir / "summaries.json");
    } else if (*stream) {
      const auto c = resolve(stream_opt);
      const auto prep = prepare_state(c, cache);
      if (prep.basis->grid().dims() != 1) throw Error("precondition", "streamlines need a 1D scenario");
      const auto& s = prep.states.front();
      const auto times = frame_times(c, s);
      if (times.size() < 2) throw Error("precondition", "streamlines need an evolving state");
      const auto dir = out_dir(stream_opt);
      const auto lines = streamline_bundle(s, c.streamlines, times);
      write_text(dir / "streamlines.csv", streamlines_csv(lines));
      wrote(dir / "streamlines.csv");
      NodeSearch ns;
      ns.time_samples = c.node_time_samples;
      const std::array<double, 2> window{times.front(), times.back()};
      write_text(dir / "nodes.json", nodes_json(find_nodes(s, window[0], window[1], c.x_min, c.x_max, ns), window));
      wrote(dir / "nodes.json");
    } else if (*vortex) {
      const auto c = resolve(vortex_opt);
      if (c.recipe != "vortex") throw Error("precondition", "vortex needs a 2D vortex scenario");
      const auto r = run_scenario(c, cache);
      const auto dir = out_dir(vortex_opt);
      write_text(dir / "vortex_profile.csv", vortex_profile_csv(*r.vortex));
      wrote(dir / "vortex_profile.csv");
      write_text(dir / "loops.csv", loops_csv(r.loops));
      wrote(dir / "loops.csv");
      nlohmann::ordered_json m;
      for (const auto& [k, v] : r.metrics) m[k] = v;
      write_text(dir / "vortex.json", m.dump(2) + "\n");
      wrote(dir / "vortex.json");
    } else if (*tune) {
      const auto c = resolve(tune_opt);
      const auto t = tune_beam_splitter(c, cache);
      std::cout << "U_0* = " << format_number(t.height) << "  T = " << format_number(t.transmission)
                << "  probes = " << t.iterations << "  monotone = " << (t.monotone ? "yes" : "no") << '\n';
      if (!tune_opt.out.empty()) {
        const auto dir = out_dir(tune_opt);
        write_text(dir / "tuning.json", tuning_json(t));
        wrote(dir / "tuning.json");
      }
    } else if (*scenario) {
      const auto c = resolve(scenario_opt);
      const auto dir = out_dir(scenario_opt);
      for (const auto& f : write_scenario(run_scenario(c, cache), dir)) wrote(dir / f);
    } else if (*render) {
      RenderSpec spec{kind, shading, {}, {}, frame};
      if (!x_range.empty()) spec.x_range = parse_range(x_range);
      if (!y_range.empty()) spec.y_range = parse_range(y_range);
      const auto svg = render_svg(load_run(run_dir), spec);
      const fs::path path = render_out.empty() ? fs::path(run_dir) / (kind + "_" + shading + ".svg") : fs::path(render_out);
      write_text(path, svg);
      std::cout << "wrote " << path.string();
      if (kind == "streamlines") std::cout << "  shaded area " << format_number(shaded_area(svg));
      std::cout << '\n';
    }
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), e.kind() == "config" ? 2 : 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
