// JSON/CSV persistence of eigenbases and superpositions.

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "madelung/error.hpp"
#include "madelung/spectral.hpp"
#include "madelung/states.hpp"

namespace madelung {

namespace {

using nlohmann::json;

json potential_json(const Potential& p) {
  json j = {{"kind", potential_kind(p)}, {"description", describe(p)}};
  if (const auto* w = std::get_if<InfiniteWell>(&p)) {
    j["half_width"] = w->half_width;
  } else if (const auto* b = std::get_if<WellWithBarrier>(&p)) {
    j["half_width"] = b->half_width;
    j["height"] = b->height;
    j["width"] = b->width;
  } else if (const auto* h = std::get_if<Harmonic>(&p)) {
    j["omega"] = h->omega;
  } else if (const auto* t = std::get_if<Tabulated>(&p)) {
    j["x"] = t->x;
    j["u"] = t->u;
  }
  return j;
}

Potential potential_from_json(const json& j) {
  const std::string kind = j.at("kind");
  if (kind == "infinite_well") return InfiniteWell{j.at("half_width")};
  if (kind == "well_with_barrier") return WellWithBarrier{j.at("half_width"), j.at("height"), j.at("width")};
  if (kind == "harmonic") return Harmonic{j.at("omega")};
  if (kind == "quartic_double_well") return QuarticDoubleWell{};
  if (kind == "tabulated") return Tabulated{j.at("x").get<std::vector<double>>(), j.at("u").get<std::vector<double>>()};
  throw Error("parse", "unknown potential kind '" + kind + "'");
}

json axis_json(const Grid1D& a) { return {{"x_min", a.x_min()}, {"x_max", a.x_max()}, {"n", a.size()}}; }

Grid1D axis_from_json(const json& j) { return Grid1D(j.at("x_min"), j.at("x_max"), j.at("n")); }

BasisKind kind_from_string(const std::string& s) {
  for (auto k : {BasisKind::Numerical, BasisKind::AnalyticWell, BasisKind::AnalyticHarmonic, BasisKind::AnalyticBox})
    if (to_string(k) == s) return k;
  throw Error("parse", "unknown basis kind '" + s + "'");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw Error("parse", "bad number '" + s + "'");
  return v;
}

}  // namespace

void save_basis(const EigenBasis& basis, const std::filesystem::path& json_path) {
  const auto csv_name = json_path.stem().string() + "_states.csv";
  json j;
  j["format"] = "madelung.eigenbasis/1";
  j["kind"] = to_string(basis.kind());
  j["potential"] = basis.potential() ? potential_json(*basis.potential()) : json(nullptr);
  json axes = json::array();
  for (std::size_t d = 0; d < basis.grid().dims(); ++d) axes.push_back(axis_json(basis.grid().axis(d)));
  j["grid"] = axes;
  j["energies"] = basis.energies();
  json labels = json::array();
  for (std::size_t i = 0; i < basis.size(); ++i) labels.push_back({basis.label(i)[0], basis.label(i)[1]});
  j["labels"] = labels;
  const auto& an = basis.analytic();
  j["analytic"] = {{"half_width", an.half_width}, {"omega", an.omega}, {"origin", an.origin}, {"length", an.length}};
  j["metadata"] = basis.metadata();
  j["states_csv"] = csv_name;

  std::ofstream out(json_path);
  if (!out) throw Error("io", "cannot write " + json_path.string());
  out << j.dump(2) << '\n';

  std::ofstream csv(json_path.parent_path() / csv_name);
  if (!csv) throw Error("io", "cannot write states CSV next to " + json_path.string());
  const bool two_d = basis.grid().dims() == 2;
  csv << (two_d ? "x,y" : "x");
  for (std::size_t i = 0; i < basis.size(); ++i) csv << ",psi_" << i;
  csv << '\n';
  for (std::size_t p = 0; p < basis.grid().size(); ++p) {
    const auto pos = basis.grid().position(p);
    csv << format_number(pos[0]);
    if (two_d) csv << ',' << format_number(pos[1]);
    for (std::size_t i = 0; i < basis.size(); ++i) csv << ',' << format_number(basis.state(i)[p]);
    csv << '\n';
  }
}

EigenBasis load_basis(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw Error("io", "cannot read " + json_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("parse", json_path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "madelung.eigenbasis/1")
    throw Error("parse", json_path.string() + " is not an eigenbasis file");
  const auto& axes = j.at("grid");
  const Grid grid = axes.size() == 1 ? Grid(axis_from_json(axes[0])) : Grid(axis_from_json(axes[0]), axis_from_json(axes[1]));
  const auto energies = j.at("energies").get<std::vector<double>>();
  std::vector<std::array<int, 2>> labels;
  for (const auto& l : j.at("labels")) labels.push_back({l[0].get<int>(), l[1].get<int>()});
  EigenBasis::Analytic an;
  an.half_width = j.at("analytic").at("half_width");
  an.omega = j.at("analytic").at("omega");
  an.origin = j.at("analytic").at("origin").get<std::array<double, 2>>();
  an.length = j.at("analytic").at("length").get<std::array<double, 2>>();
  std::optional<Potential> potential;
  if (!j.at("potential").is_null()) potential = potential_from_json(j.at("potential"));
  const auto meta = j.at("metadata").get<std::map<std::string, double>>();

  std::ifstream csv(json_path.parent_path() / j.at("states_csv").get<std::string>());
  if (!csv) throw Error("io", "missing states CSV for " + json_path.string());
  std::string line;
  std::getline(csv, line);
  const std::size_t offset = grid.dims();
  std::vector<std::vector<double>> columns(energies.size(), std::vector<double>(grid.size()));
  std::size_t row = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (row >= grid.size() || cells.size() != offset + energies.size())
      throw Error("parse", "states CSV does not match its JSON header");
    for (std::size_t i = 0; i < energies.size(); ++i) columns[i][row] = parse_double(cells[offset + i]);
    ++row;
  }
  if (row != grid.size()) throw Error("parse", "states CSV has " + std::to_string(row) + " rows, expected " + std::to_string(grid.size()));
  std::vector<ScalarField> states;
  for (auto& c : columns) states.emplace_back(grid, std::move(c));
  return EigenBasis(kind_from_string(j.at("kind")), grid, energies, std::move(states), std::move(labels),
                    std::move(potential), an, meta);
}

std::string to_json(const Superposition& s) {
  const auto& b = s.basis();
  json j;
  j["format"] = "madelung.superposition/1";
  json axes = json::array();
  for (std::size_t d = 0; d < b.grid().dims(); ++d) axes.push_back(axis_json(b.grid().axis(d)));
  j["basis"] = {{"kind", to_string(b.kind())},
                {"potential", b.potential() ? json(describe(*b.potential())) : json(nullptr)},
                {"grid", axes},
                {"size", b.size()}};
  json states = json::array();
  for (std::size_t k = 0; k < s.indices().size(); ++k) {
    const std::size_t i = s.indices()[k];
    states.push_back({{"index", i},
                      {"label", {b.label(i)[0], b.label(i)[1]}},
                      {"energy", b.energy(i)},
                      {"re", s.coeffs()[k].real()},
                      {"im", s.coeffs()[k].imag()}});
  }
  j["states"] = states;
  j["band_limit"] = s.band_limit();
  if (const auto& t = s.truncation()) {
    j["truncation"] = {{"eta", t->eta},
                       {"kept", t->kept},
                       {"discarded_norm", t->discarded_norm},
                       {"wall_amplitude", t->wall_amplitude},
                       {"wall_guard", t->wall_guard}};
  } else {
    j["truncation"] = nullptr;
  }
  return j.dump(2);
}

}  // namespace madelung
