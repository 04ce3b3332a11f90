// Run directory writer: config, manifest, CSV tables, node events, state and
// the default figures. Everything is written in a fixed order with fixed
// number formatting so identical runs give identical bytes.

#include <fstream>

#include "json.hpp"
#include "madelung/error.hpp"
#include "madelung/render.hpp"
#include "madelung/output.hpp"

namespace madelung {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + p.string());
  out << text;
  if (!out) throw Error("io", "write failed for " + p.string());
}

namespace {

// NaN and infinities have no JSON form; they become null
ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json summary_json(const FrameSummary& f) {
  return {{"t", f.t},
          {"state", f.state},
          {"norm", f.norm},
          {"soft_area", f.soft_area},
          {"hard_area", f.hard_area},
          {"soft_reduced_area", f.soft_reduced_area},
          {"hard_reduced_area", f.hard_reduced_area},
          {"forbidden_global_area", f.forbidden_global_area},
          {"forbidden_local_area", f.forbidden_local_area},
          {"global_in_hard", f.global_in_hard},
          {"local_in_soft", f.local_in_soft},
          {"reduced_integral", f.reduced_integral},
          {"kinetic_potential_sum", f.kinetic_potential_sum},
          {"particle_energy_integral", f.particle_energy_integral},
          {"hj_max", number(f.hj_max)}};
}

ordered_json config_json(const ScenarioConfig& c) {
  ordered_json j;
  std::stringstream ss(to_text(c));
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find(" = ");
    j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t stride) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; i += stride) out.push_back(i);
  if (out.back() != n - 1) out.push_back(n - 1);
  return out;
}

}  // namespace

std::string frames_csv(const std::vector<Frame>& frames, std::size_t stride) {
  if (frames.empty()) throw Error("precondition", "no frames to write");
  if (stride == 0) throw Error("precondition", "stride must be positive");
  std::ostringstream out;
  const Grid& g = frames.front().ledger.rho.grid();
  const bool two_d = g.dims() == 2;
  out << "frame,t,state,x," << (two_d ? "y," : "")
      << "rho,Q,K_a,K_s,Q_r,K_c,E_p,K_cl,U,q,k_a,k_s,q_r,k_c,e_p,u,"
         "soft,hard,soft_reduced,hard_reduced,forbidden_global,forbidden_local,valid\n";
  const auto xs = sample_indices(g.extent(0), stride);
  const auto ys = two_d ? sample_indices(g.extent(1), stride) : std::vector<std::size_t>{0};
  auto value = [](const ScalarField& f, std::size_t p) { return format_number(f.valid(p) ? f[p] : std::nan("")); };
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto& fr = frames[k];
    const auto& pp = fr.ledger.per_particle;
    const auto& dd = fr.ledger.density;
    const auto& m = fr.masks;
    const std::string head = std::to_string(k) + ',' + format_number(fr.summary.t) + ',' + std::to_string(fr.summary.state) + ',';
    for (auto i : xs)
      for (auto j : ys) {
        const std::size_t p = g.index(i, j);
        const auto pos = g.position(p);
        out << head << format_number(pos[0]) << ',';
        if (two_d) out << format_number(pos[1]) << ',';
        out << format_number(fr.ledger.rho[p]);
        for (const auto* f : {&pp.quantum_potential, &pp.flow_kinetic, &pp.symmetric_kinetic, &pp.reduced_potential,
                              &pp.total_kinetic, &pp.particle_energy, &pp.kinetic_bound, &pp.potential, &dd.quantum_potential,
                              &dd.flow_kinetic, &dd.symmetric_kinetic, &dd.reduced_potential, &dd.total_kinetic,
                              &dd.particle_energy, &dd.potential})
          out << ',' << value(*f, p);
        for (const auto* mk : {&m.soft, &m.hard, &m.soft_reduced, &m.hard_reduced, &m.forbidden_global, &m.forbidden_local, &m.valid})
          out << ',' << int((*mk)[p] != 0);
        out << '\n';
      }
  }
  return out.str();
}

std::string streamlines_csv(const std::vector<Streamline>& lines) {
  std::ostringstream out;
  out << "line,seed_q,t,x,halted\n";
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const auto& s = lines[l];
    for (const auto& smp : s.samples)
      out << l << ',' << format_number(s.seed_quantile) << ',' << format_number(smp.t) << ',' << format_number(smp.x)
          << ',' << int(s.halted) << '\n';
  }
  return out.str();
}

std::string nodes_json(const std::vector<NodeEvent>& events, std::array<double, 2> window) {
  ordered_json nodes = {{"window", window}, {"events", ordered_json::array()}};
  for (const auto& e : events)
    nodes["events"].push_back(
        {{"t", e.t}, {"x", e.x}, {"refined", e.refined}, {"isolated", e.isolated}, {"residual", e.residual}});
  return nodes.dump(2) + "\n";
}

std::string vortex_profile_csv(const VortexProfile& v) {
  std::ostringstream out;
  out << "r,count,Q,K_a,speed,energy_residual\n";
  for (std::size_t b = 0; b < v.radii.size(); ++b)
    out << format_number(v.radii[b]) << ',' << v.counts[b] << ',' << format_number(v.quantum_potential[b]) << ','
        << format_number(v.flow_kinetic[b]) << ',' << format_number(v.speed[b]) << ','
        << format_number(v.energy_residual[b]) << '\n';
  return out.str();
}

std::string loops_csv(const std::vector<std::vector<std::array<double, 2>>>& loops) {
  std::ostringstream out;
  out << "loop,x,y\n";
  for (std::size_t l = 0; l < loops.size(); ++l)
    for (const auto& p : loops[l]) out << l << ',' << format_number(p[0]) << ',' << format_number(p[1]) << '\n';
  return out.str();
}

std::string tuning_json(const TuningResult& t) {
  ordered_json probes = ordered_json::array();
  for (const auto& p : t.probes) probes.push_back({{"height", p.height}, {"transmission", p.transmission}});
  const ordered_json j = {{"height", t.height},   {"transmission", t.transmission}, {"iterations", t.iterations},
                          {"bracket", t.bracket}, {"monotone", t.monotone},         {"probes", probes}};
  return j.dump(2) + "\n";
}

std::string summaries_json(const std::vector<Frame>& frames) {
  ordered_json a = ordered_json::array();
  for (const auto& f : frames) a.push_back(summary_json(f.summary));
  return a.dump(2) + "\n";
}

std::vector<std::string> write_scenario(const ScenarioResult& r, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("io", "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    files.push_back(name);
  };

  emit("config.txt", to_text(r.config));

  emit("frames.csv", frames_csv(r.frames, r.config.stride));
  if (!r.streamlines.empty()) emit("streamlines.csv", streamlines_csv(r.streamlines));

  if (r.basis->grid().dims() == 2) {
    ordered_json nodes = {{"window", {r.config.t_begin, r.config.t_begin}}, {"events", ordered_json::array()}};
    if (r.metrics.count("node_x"))
      nodes["events"].push_back({{"t", r.config.t_begin}, {"x", r.metrics.at("node_x")}, {"y", r.metrics.at("node_y")}});
    emit("nodes.json", nodes.dump(2) + "\n");
  } else {
    emit("nodes.json", nodes_json(r.nodes, r.node_window));
  }

  {
    ordered_json states = ordered_json::array();
    for (const auto& s : r.states) states.push_back(ordered_json::parse(to_json(s)));
    emit("state.json", states.dump(2) + "\n");
  }

  if (r.vortex) emit("vortex_profile.csv", vortex_profile_csv(*r.vortex));
  if (!r.loops.empty()) emit("loops.csv", loops_csv(r.loops));

  // the manifest goes last but one so it can list the data files; figures
  // are drawn from the files just written
  ordered_json m;
  m["scenario"] = r.config.name;
  m["dims"] = r.basis->grid().dims();
  m["config"] = config_json(r.config);
  m["basis"] = {{"kind", to_string(r.basis->kind())},
                {"potential", r.basis->potential() ? describe(*r.basis->potential()) : std::string("box")},
                {"modes", r.basis->size()}};
  m["band_limit"] = r.states.front().band_limit();
  m["period"] = r.period;
  m["times"] = r.times;
  ordered_json metrics;
  for (const auto& [k, v] : r.metrics) metrics[k] = number(v);
  m["metrics"] = metrics;
  if (r.calibration)
    m["calibration"] = {{"width", r.calibration->width},
                        {"window_low", r.calibration->window_low},
                        {"window_high", r.calibration->window_high}};
  if (r.tuning) m["tuning"] = ordered_json::parse(tuning_json(*r.tuning));
  if (r.config.potential == "well_with_barrier" && r.config.recipe == "pulse")
    m["barrier_width_reading"] = "width is the unit length over 50; set barrier_width = 0.08 for the full-well reading";
  m["frames"] = ordered_json::parse(summaries_json(r.frames));
  m["data_files"] = files;
  emit("manifest.json", m.dump(2) + "\n");

  const auto run = load_run(dir);
  for (const auto& [name, spec] : default_figures(run)) emit(name, render_svg(run, spec));
  return files;
}

}  // namespace madelung
