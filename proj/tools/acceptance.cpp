// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are fixed
// here; the exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include "madelung/error.hpp"
#include "madelung/flow.hpp"
#include "madelung/scenarios.hpp"

using namespace madelung;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

std::shared_ptr<const EigenBasis> share(EigenBasis b) { return std::make_shared<const EigenBasis>(std::move(b)); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  failures += !o.pass;
  std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), sec);
  std::fflush(stdout);
}

EigenCache cache;
std::map<std::string, ScenarioResult> runs;

const ScenarioResult& result(const std::string& name) {
  auto it = runs.find(name);
  if (it == runs.end()) it = runs.emplace(name, run_scenario(default_config(name), cache)).first;
  return it->second;
}

const std::vector<std::string> pair_names = {"well_superposition", "well_barrier_superposition", "ho_superposition",
                                             "quartic_superposition"};

bool in_ratio(double r) { return r >= 3.5 && r <= 4.5; }

// max over valid points of |Q + U - E| / E for the quartic ground state
double flatness(std::size_t n, double e_ref) {
  const auto b = share(numerical_basis(QuarticDoubleWell{}, Grid1D(-1.25, 1.25, n), 1));
  const auto d = decompose(eigenstate(b, 0), 0.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (d.valid[i])
      worst = std::max(worst, std::abs(d.per_particle.quantum_potential[i] + d.per_particle.potential[i] - e_ref));
  return worst / e_ref;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  criterion(1, "eigenvalues", [] {
    const auto well = cache.get(InfiniteWell{1.0}, Grid1D(-1.0, 1.0, 2001), 4);
    const auto ho = cache.get(Harmonic{10.0}, Grid1D(-2.5, 2.5, 2001), 5);
    double ew = 0.0, eh = 0.0;
    for (int n = 1; n <= 4; ++n) ew = std::max(ew, std::abs(well->energy(n - 1) / (n * n * pi * pi / 8) - 1));
    for (int n = 0; n <= 4; ++n) eh = std::max(eh, std::abs(ho->energy(n) / ((n + 0.5) * 10) - 1));
    return Outcome{ew < 1e-3 && eh < 1e-3, "well max rel err " + num(ew) + ", oscillator " + num(eh) + " (< 1e-3)"};
  });

  criterion(2, "flatness of Q + U", [] {
    // continuum E_0 from Richardson extrapolation of two finer grids
    auto e0 = [](std::size_t n) { return numerical_basis(QuarticDoubleWell{}, Grid1D(-1.25, 1.25, n), 1).energy(0); };
    const double e4 = e0(4001), e8 = e0(8001);
    const double ref = (4 * e8 - e4) / 3;
    const double f1 = flatness(2001, ref), f2 = flatness(4001, ref);
    return Outcome{f1 < 1e-3 && in_ratio(f1 / f2),
                   "n=2001 " + num(f1) + " (< 1e-3), n=4001 " + num(f2) + ", ratio " + num(f1 / f2) + " (3.5..4.5)"};
  });

  criterion(3, "ledger identities", [] {
    // pointwise identities at two resolutions, relative to the field scale
    auto identity = [](std::size_t n) {
      const auto s = two_state(share(harmonic_basis(10.0, Grid1D(-2.5, 2.5, n), 2)), 0, 1, complex(0, 1));
      const auto d = decompose(s, 0.1);
      const auto& p = d.per_particle;
      double e = 0.0, scale = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!d.valid[i]) continue;
        scale = std::max({scale, std::abs(p.quantum_potential[i]), std::abs(p.total_kinetic[i])});
        e = std::max(e, std::abs(p.quantum_potential[i] - p.symmetric_kinetic[i] - p.reduced_potential[i]));
        e = std::max(e, std::abs(p.total_kinetic[i] - p.flow_kinetic[i] - p.symmetric_kinetic[i]));
      }
      return e / scale;
    };
    const double i1 = identity(1001), i2 = identity(2001);
    const bool identities = (i1 < 1e-12 && i2 < 1e-12) || in_ratio(i1 / i2);
    // Q against the literal -lap R / 2R
    auto literal = [](std::size_t n) {
      const auto s = two_state(share(harmonic_basis(10.0, Grid1D(-2.5, 2.5, n), 2)), 0, 1, complex(0, 1));
      const auto d = decompose(s, 0.0);
      const auto f = polar_fields(s.evaluate(0.0), s.time_derivative(0.0));
      const auto lap = laplacian(f.amplitude);
      double e = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (d.valid[i] && std::abs(s.grid().axis(0)[i]) <= 1.0)
          e = std::max(e, std::abs(d.per_particle.quantum_potential[i] + 0.5 * lap[i] / f.amplitude[i]));
      return e;
    };
    const double l1 = literal(1001), l2 = literal(2001);
    // reduced potential integrates to zero for every 1D scenario state
    double qr = 0.0;
    std::size_t states = 0, frames = 0;
    for (const auto& name : scenario_names()) {
      if (name == "vortex_2d") continue;
      const auto& r = result(name);
      states += r.states.size();
      for (const auto& f : r.frames) qr = std::max(qr, std::abs(f.summary.reduced_integral)), ++frames;
    }
    // k_s + u integrates to E_n for real eigenstates
    double ks = 0.0;
    for (const std::string name : {"ho_eigenstates", "quartic_eigenstates"})
      for (const auto& f : result(name).frames)
        ks = std::max(ks, std::abs(f.summary.kinetic_potential_sum - result(name).basis->energy(f.summary.state)));
    const bool pass = identities && in_ratio(l1 / l2) && qr < 1e-8 && ks < 1e-6;
    return Outcome{pass, "identity err " + num(i1) + " -> " + num(i2) + ", literal Q err ratio " + num(l1 / l2) +
                             ", max|int q_r| " + num(qr) + " over " + std::to_string(states) + " states/" +
                             std::to_string(frames) + " frames (< 1e-8), max|int k_s+u - E| " + num(ks) + " (< 1e-6)"};
  });

  criterion(4, "Hamilton-Jacobi and continuity residuals", [] {
    auto residuals = [](std::size_t n, double dt) {
      const auto s = two_state(share(well_basis(1.0, Grid1D(-1.0, 1.0, n), 2)), 0, 1, -1.0);
      const double T = s.period();
      double hj = 0.0, ct = 0.0;
      for (int k = 0; k < 8; ++k) {
        const double t = (k + 0.5) * T / 8;
        hj = std::max(hj, max_abs(hj_residual(decompose(s, t))));
        ct = std::max(ct, max_abs(continuity_residual(s, t, dt)));
      }
      return std::array<double, 2>{hj, ct};
    };
    const auto a = residuals(1001, 2e-3), b = residuals(2001, 1e-3);
    const double rh = a[0] / b[0], rc = a[1] / b[1];
    return Outcome{in_ratio(rh) && in_ratio(rc), "HJ " + num(a[0]) + " -> " + num(b[0]) + " (ratio " + num(rh) +
                                                     "), continuity " + num(a[1]) + " -> " + num(b[1]) + " (ratio " +
                                                     num(rc) + "), ratios in 3.5..4.5"};
  });

  criterion(5, "superoscillation set relations", [] {
    std::size_t frames = 0, bad = 0;
    for (const auto& name : scenario_names()) {
      if (name == "vortex_2d") continue;
      for (const auto& f : result(name).frames) {
        ++frames;
        const auto& s = f.summary;
        bad += !(s.global_in_hard && s.local_in_soft && s.soft_reduced_area >= s.soft_area);
      }
    }
    return Outcome{bad == 0, std::to_string(frames - bad) + "/" + std::to_string(frames) + " frames satisfy all three"};
  });

  criterion(6, "streamlines track quantiles", [] {
    const auto& r = result("well_superposition");
    const auto& s = r.states.front();
    double cdf_err = 0.0, ret = 0.0;
    bool ordered = r.streamlines.size() == 9;
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      const auto psi = s.evaluate(r.times[k]);
      std::vector<double> rho(psi.size());
      for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi[i]);
      const CumulativeDensity cdf(ScalarField(s.grid(), std::move(rho)));
      for (std::size_t l = 0; l < r.streamlines.size(); ++l) {
        const auto& line = r.streamlines[l];
        if (line.halted || line.samples.size() != r.times.size()) {
          ordered = false;
          continue;
        }
        cdf_err = std::max(cdf_err, std::abs(cdf(line.samples[k].x) - line.seed_quantile));
        if (l > 0 && !(r.streamlines[l - 1].samples[k].x < line.samples[k].x)) ordered = false;
      }
    }
    for (const auto& line : r.streamlines)
      ret = std::max(ret, std::abs(line.samples.back().x - line.samples.front().x));
    return Outcome{ordered && cdf_err < 1e-3 && ret < 1e-3,
                   "9 seeds, max|CDF - q| " + num(cdf_err) + ", max|x(T) - x(0)| " + num(ret) + " (< 1e-3), " +
                       (ordered ? "no crossing" : "crossing or halted line")};
  });

  criterion(7, "node events", [] {
    bool pass = true;
    std::string detail;
    for (const auto& name : pair_names) {
      const auto& r = result(name);
      std::vector<NodeEvent> iso;
      for (const auto& e : r.nodes)
        if (e.isolated) iso.push_back(e);
      double res = 0.0;
      for (const auto& e : iso) res = std::max(res, e.refined ? e.residual : 1.0);
      const bool ok = iso.size() == 2 && std::abs(iso[0].x + iso[1].x) < 1e-6 &&
                      std::abs(std::abs(iso[1].t - iso[0].t) - r.period / 2) < 1e-6 * r.period && res < 1e-8;
      pass = pass && ok;
      detail += (detail.empty() ? "" : "; ") + name + " " + std::to_string(iso.size()) + " events, |Psi| " + num(res);
    }
    return Outcome{pass, detail};
  });

  criterion(8, "2D vortex", [] {
    const auto& r = result("vortex_2d");
    const auto& v = *r.vortex;
    double lo = HUGE_VAL, hi = 0.0, mean = 0.0;
    for (std::size_t b = 0; b < v.radii.size(); ++b) {
      const double c = v.speed[b] * v.radii[b];
      lo = std::min(lo, c);
      hi = std::max(hi, c);
      mean += c / v.radii.size();
    }
    const double spread = (hi - lo) / mean;
    const double ep = r.metrics.at("particle_energy_max_deviation");
    const double e_gap = std::abs(r.metrics.at("energy") - 2.5 * pi * pi);
    const double gam = std::abs(std::abs(r.metrics.at("circulation_node")) - 2 * pi);
    const double off = std::abs(r.metrics.at("circulation_off_node"));
    const double p = v.fit_exponent;
    const bool pass = ep < 1e-6 && e_gap < 1e-6 && std::abs(p + 2) <= 0.05 && spread < 0.05 && gam < 1e-3 && off < 1e-3;
    return Outcome{pass, "max|E_p - 5pi^2/2| " + num(std::max(ep, e_gap)) + ", exponent " + num(p) + ", |v|r spread " +
                             num(spread) + ", ||Gamma| - 2pi| " + num(gam) + ", off-node " + num(off)};
  });

  criterion(9, "band limits", [] {
    auto norm = [](const Superposition& s) {
      double n = 0.0;
      for (const auto& c : s.coeffs()) n += std::norm(c);
      return n;
    };
    const auto& refl = result("reflection_pulse");
    auto c = default_config("mzi_1d");
    const auto mzi = make_pulse(c, cache).state;
    const std::size_t k1 = refl.states.front().truncation()->kept, k2 = mzi.truncation()->kept;
    const double n1 = std::abs(norm(refl.states.front()) - 1), n2 = std::abs(norm(mzi) - 1);
    return Outcome{k1 == 18 && k2 == 89 && n1 < 1e-10 && n2 < 1e-10,
                   "reflection " + std::to_string(k1) + " terms, mzi " + std::to_string(k2) + " terms, norm err " +
                       num(std::max(n1, n2))};
  });

  criterion(10, "beam splitter", [] {
    const auto& t = *result("mzi_1d").tuning;
    return Outcome{std::abs(t.transmission - 0.5) < 0.01 && t.iterations <= 30 && t.monotone,
                   "U_0* " + num(t.height) + ", T " + num(t.transmission) + ", " + std::to_string(t.iterations) +
                       " probes, " + (t.monotone ? "monotone" : "not monotone")};
  });

  criterion(11, "determinism", [] {
    const auto root = fs::temp_directory_path() / "madelung_acceptance";
    fs::remove_all(root);
    std::size_t files = 0, differ = 0;
    EigenCache fresh;
    for (const auto& name : scenario_names()) {
      const auto a = write_scenario(result(name), root / "a" / name);
      const auto b = write_scenario(run_scenario(default_config(name), fresh), root / "b" / name);
      if (a != b) ++differ;
      for (const auto& f : a) {
        ++files;
        differ += slurp(root / "a" / name / f) != slurp(root / "b" / name / f);
      }
    }
    fs::remove_all(root);
    return Outcome{differ == 0, std::to_string(files - differ) + "/" + std::to_string(files) +
                                    " files byte-identical across two runs of every scenario"};
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
