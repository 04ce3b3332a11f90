// Python module madelung._core: scenario configs, runs, states and figures.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "madelung/error.hpp"
#include "madelung/output.hpp"
#include "madelung/render.hpp"
#include "madelung/scenarios.hpp"

namespace py = pybind11;
using namespace madelung;

namespace {

py::array_t<double> to_numpy(const ScalarField& f) {
  py::array_t<double> a(static_cast<py::ssize_t>(f.size()));
  auto m = a.mutable_unchecked<1>();
  for (std::size_t i = 0; i < f.size(); ++i) m(i) = f.valid(i) ? f[i] : std::nan("");
  return a;
}

py::array_t<std::complex<double>> to_numpy(const ComplexField& f) {
  py::array_t<std::complex<double>> a(static_cast<py::ssize_t>(f.size()));
  auto m = a.mutable_unchecked<1>();
  for (std::size_t i = 0; i < f.size(); ++i) m(i) = f[i];
  return a;
}

py::array_t<bool> to_numpy(const Mask& mask) {
  py::array_t<bool> a(static_cast<py::ssize_t>(mask.size()));
  auto m = a.mutable_unchecked<1>();
  for (std::size_t i = 0; i < mask.size(); ++i) m(i) = mask[i] != 0;
  return a;
}

py::dict ledger_dict(const Ledger& l) {
  py::dict d;
  d["Q"] = to_numpy(l.quantum_potential);
  d["K_a"] = to_numpy(l.flow_kinetic);
  d["K_s"] = to_numpy(l.symmetric_kinetic);
  d["Q_r"] = to_numpy(l.reduced_potential);
  d["K_c"] = to_numpy(l.total_kinetic);
  d["E_p"] = to_numpy(l.particle_energy);
  d["K_cl"] = to_numpy(l.kinetic_bound);
  d["U"] = to_numpy(l.potential);
  return d;
}

py::dict frame_dict(const Frame& f) {
  py::dict d;
  const auto& s = f.summary;
  d["t"] = s.t;
  d["state"] = s.state;
  d["norm"] = s.norm;
  d["soft_area"] = s.soft_area;
  d["hard_area"] = s.hard_area;
  d["soft_reduced_area"] = s.soft_reduced_area;
  d["hard_reduced_area"] = s.hard_reduced_area;
  d["forbidden_global_area"] = s.forbidden_global_area;
  d["forbidden_local_area"] = s.forbidden_local_area;
  d["global_in_hard"] = s.global_in_hard;
  d["local_in_soft"] = s.local_in_soft;
  d["reduced_integral"] = s.reduced_integral;
  d["kinetic_potential_sum"] = s.kinetic_potential_sum;
  d["particle_energy_integral"] = s.particle_energy_integral;
  d["hj_max"] = s.hj_max;
  return d;
}

py::dict tuning_dict(const TuningResult& t) {
  py::list probes;
  for (const auto& p : t.probes) probes.append(py::make_tuple(p.height, p.transmission));
  py::dict d;
  d["height"] = t.height;
  d["transmission"] = t.transmission;
  d["iterations"] = t.iterations;
  d["bracket"] = py::make_tuple(t.bracket[0], t.bracket[1]);
  d["monotone"] = t.monotone;
  d["probes"] = probes;
  return d;
}

ScenarioConfig config_from(const py::object& o) {
  if (py::isinstance<ScenarioConfig>(o)) return o.cast<ScenarioConfig>();
  return default_config(o.cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Madelung quantum-hydrodynamics lab";

  static py::handle error_type = PyErr_NewException("madelung._core.MadelungError", PyExc_RuntimeError, nullptr);
  m.attr("MadelungError") = error_type;
  // args are (kind, message)
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::tuple args = py::make_tuple(e.kind(), e.what());
      PyErr_SetObject(error_type.ptr(), args.ptr());
    }
  });

  py::class_<ScenarioConfig>(m, "Config")
      .def_static("preset", &default_config, py::arg("name"))
      .def_static("parse", &parse_config, py::arg("text"), py::arg("fallback_name") = "")
      .def_static("load", [](const std::filesystem::path& p) { return load_config(p); })
      .def("set", [](ScenarioConfig& c, const std::string& k, const std::string& v) { set_config_value(c, k, v); })
      .def("validate", [](const ScenarioConfig& c) { validate(c); })
      .def("text", &to_text)
      .def_readonly("name", &ScenarioConfig::name)
      .def_readonly("recipe", &ScenarioConfig::recipe)
      .def_readonly("potential", &ScenarioConfig::potential)
      .def_readonly("grid_n", &ScenarioConfig::grid_n)
      .def("__repr__", [](const ScenarioConfig& c) { return "<Config " + c.name + ">"; });

  py::class_<Superposition>(m, "State")
      .def("evaluate", [](const Superposition& s, double t) { return to_numpy(s.evaluate(t)); }, py::arg("t"))
      .def("axis", [](const Superposition& s, std::size_t d) { return s.grid().axis(d).coordinates(); },
           py::arg("d") = 0)
      .def_property_readonly("dims", [](const Superposition& s) { return s.grid().dims(); })
      .def_property_readonly("indices", &Superposition::indices)
      .def_property_readonly("coeffs", &Superposition::coeffs)
      .def_property_readonly("energies",
                             [](const Superposition& s) {
                               std::vector<double> e;
                               for (auto i : s.indices()) e.push_back(s.basis().energy(i));
                               return e;
                             })
      .def("band_limit", &Superposition::band_limit)
      .def("mean_energy", &Superposition::mean_energy)
      .def("period", &Superposition::period)
      .def(
          "decompose",
          [](const Superposition& s, double t) {
            const auto d = decompose(s, t);
            const auto mk = classify_superoscillation(d);
            py::dict out;
            out["rho"] = to_numpy(d.rho);
            out["per_particle"] = ledger_dict(d.per_particle);
            out["density"] = ledger_dict(d.density);
            out["valid"] = to_numpy(d.valid);
            py::dict masks;
            masks["soft"] = to_numpy(mk.soft);
            masks["hard"] = to_numpy(mk.hard);
            masks["soft_reduced"] = to_numpy(mk.soft_reduced);
            masks["hard_reduced"] = to_numpy(mk.hard_reduced);
            masks["forbidden_global"] = to_numpy(mk.forbidden_global);
            masks["forbidden_local"] = to_numpy(mk.forbidden_local);
            out["masks"] = masks;
            return out;
          },
          py::arg("t"))
      .def("to_json", [](const Superposition& s) { return to_json(s); });

  py::class_<ScenarioResult>(m, "Result")
      .def_readonly("config", &ScenarioResult::config)
      .def_readonly("states", &ScenarioResult::states)
      .def_readonly("times", &ScenarioResult::times)
      .def_readonly("period", &ScenarioResult::period)
      .def_readonly("metrics", &ScenarioResult::metrics)
      .def_readonly("loops", &ScenarioResult::loops)
      .def_property_readonly("frames",
                             [](const ScenarioResult& r) {
                               py::list l;
                               for (const auto& f : r.frames) l.append(frame_dict(f));
                               return l;
                             })
      .def_property_readonly("nodes",
                             [](const ScenarioResult& r) {
                               py::list l;
                               for (const auto& e : r.nodes) {
                                 py::dict d;
                                 d["t"] = e.t;
                                 d["x"] = e.x;
                                 d["refined"] = e.refined;
                                 d["isolated"] = e.isolated;
                                 d["residual"] = e.residual;
                                 l.append(d);
                               }
                               return l;
                             })
      .def_property_readonly("streamlines",
                             [](const ScenarioResult& r) {
                               py::list l;
                               for (const auto& s : r.streamlines) {
                                 std::vector<double> t, x;
                                 for (const auto& p : s.samples) t.push_back(p.t), x.push_back(p.x);
                                 py::dict d;
                                 d["seed_quantile"] = s.seed_quantile;
                                 d["t"] = t;
                                 d["x"] = x;
                                 d["halted"] = s.halted;
                                 l.append(d);
                               }
                               return l;
                             })
      .def_property_readonly("tuning",
                             [](const ScenarioResult& r) -> py::object {
                               if (!r.tuning) return py::none();
                               return tuning_dict(*r.tuning);
                             })
      .def("write", [](const ScenarioResult& r, const std::filesystem::path& dir) { return write_scenario(r, dir); });

  m.def("scenario_names", &scenario_names);
  m.def(
      "run_scenario",
      [](const py::object& config) {
        EigenCache cache;
        const auto c = config_from(config);
        py::gil_scoped_release release;
        return run_scenario(c, cache);
      },
      py::arg("config"), "Run a preset (by name) or a Config.");
  m.def(
      "prepare_states",
      [](const py::object& config) {
        EigenCache cache;
        return prepare_state(config_from(config), cache).states;
      },
      py::arg("config"));
  m.def(
      "tune_beam_splitter",
      [](const py::object& config) {
        EigenCache cache;
        const auto c = config_from(config);
        TuningResult t;
        {
          py::gil_scoped_release release;
          t = tune_beam_splitter(c, cache);
        }
        return tuning_dict(t);
      },
      py::arg("config"));
  m.def(
      "render",
      [](const std::filesystem::path& run_dir, const std::string& kind, const std::string& shading) {
        return render_svg(load_run(run_dir), {kind, shading, {}, {}, {}});
      },
      py::arg("run_dir"), py::arg("kind") = "streamlines", py::arg("shading") = "qka");
  m.def("shaded_area", &shaded_area, py::arg("svg"));
}
