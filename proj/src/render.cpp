#include "madelung/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "madelung/error.hpp"

namespace madelung {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* soft_fill = "#d9d9d9";  // light gray
constexpr const char* hard_fill = "#8c8c8c";  // dark gray
constexpr const char* palette[] = {"#1f4e9c", "#c0392b", "#27864a", "#8e44ad", "#d68910", "#2c3e50"};

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double parse_cell(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw Error("parse", "bad CSV cell '" + s + "'");
  }
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("io", "cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("parse", p.string() + ": " + e.what());
  }
}

// Plot area with linear (or log) maps from data to pixels; y grows upward.
struct Panel {
  double left, top, width, height;
  double x0, x1, y0, y1;
  bool log_x = false, log_y = false;

  double sx(double x) const {
    if (log_x) x = std::log10(x);
    return left + (x - x0) / (x1 - x0) * width;
  }
  double sy(double y) const {
    if (log_y) y = std::log10(y);
    return top + height - (y - y0) / (y1 - y0) * height;
  }
};

class Svg {
 public:
  Svg(double w, double h) : w_(w), h_(h) {}

  void add(const std::string& s) { body_ << s << '\n'; }

  void frame(const Panel& p, const std::string& xlabel, const std::string& ylabel, const std::string& clip_id) {
    add("<defs><clipPath id=\"" + clip_id + "\"><rect x=\"" + px(p.left) + "\" y=\"" + px(p.top) + "\" width=\"" +
        px(p.width) + "\" height=\"" + px(p.height) + "\"/></clipPath></defs>");
    add("<rect x=\"" + px(p.left) + "\" y=\"" + px(p.top) + "\" width=\"" + px(p.width) + "\" height=\"" +
        px(p.height) + "\" fill=\"none\" stroke=\"#000\"/>");
    for (int k = 0; k <= 4; ++k) {
      const double fx = p.x0 + (p.x1 - p.x0) * k / 4.0, fy = p.y0 + (p.y1 - p.y0) * k / 4.0;
      const double X = p.left + p.width * k / 4.0, Y = p.top + p.height * (1.0 - k / 4.0);
      const double vx = p.log_x ? std::pow(10.0, fx) : fx, vy = p.log_y ? std::pow(10.0, fy) : fy;
      add("<text x=\"" + px(X) + "\" y=\"" + px(p.top + p.height + 16) + "\" text-anchor=\"middle\">" + label(vx) +
          "</text>");
      add("<text x=\"" + px(p.left - 6) + "\" y=\"" + px(Y + 4) + "\" text-anchor=\"end\">" + label(vy) + "</text>");
    }
    add("<text x=\"" + px(p.left + p.width / 2) + "\" y=\"" + px(p.top + p.height + 36) +
        "\" text-anchor=\"middle\">" + xlabel + "</text>");
    add("<text x=\"" + px(p.left - 58) + "\" y=\"" + px(p.top + p.height / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 " +
        px(p.left - 58) + " " + px(p.top + p.height / 2) + ")\">" + ylabel + "</text>");
  }

  // Polyline broken at non-finite points.
  void curve(const Panel& p, const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
             const std::string& clip_id, const std::string& extra = "") {
    std::string pts;
    auto flush = [&] {
      if (!pts.empty())
        add("<polyline clip-path=\"url(#" + clip_id + ")\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.2\"" +
            extra + " points=\"" + pts + "\"/>");
      pts.clear();
    };
    for (std::size_t i = 0; i < x.size(); ++i) {
      const bool ok = std::isfinite(x[i]) && std::isfinite(y[i]) && (!p.log_x || x[i] > 0) && (!p.log_y || y[i] > 0);
      if (!ok) {
        flush();
        continue;
      }
      pts += (pts.empty() ? "" : " ") + px(p.sx(x[i])) + "," + px(p.sy(y[i]));
    }
    flush();
  }

  void legend(const Panel& p, const std::vector<std::pair<std::string, std::string>>& entries) {
    double y = p.top + 14;
    for (const auto& [name, color] : entries) {
      add("<line x1=\"" + px(p.left + p.width - 110) + "\" y1=\"" + px(y - 4) + "\" x2=\"" + px(p.left + p.width - 90) +
          "\" y2=\"" + px(y - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>");
      add("<text x=\"" + px(p.left + p.width - 85) + "\" y=\"" + px(y) + "\">" + name + "</text>");
      y += 16;
    }
  }

  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(w_) << "\" height=\"" << px(h_)
        << "\" viewBox=\"0 0 " << px(w_) << ' ' << px(h_) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  double w_, h_;
  std::ostringstream body_;
};

// Rows [begin, end) of each frame in frames.csv.
std::vector<std::array<std::size_t, 2>> frame_rows(const Table& t) {
  const auto& f = t["frame"];
  std::vector<std::array<std::size_t, 2>> out;
  for (std::size_t r = 0; r < f.size(); ++r)
    if (r == 0 || f[r] != f[r - 1]) out.push_back({r, r});
  for (std::size_t k = 0; k < out.size(); ++k) out[k][1] = k + 1 < out.size() ? out[k + 1][0] : f.size();
  return out;
}

std::vector<double> slice(const std::vector<double>& v, std::array<std::size_t, 2> r) {
  return {v.begin() + static_cast<std::ptrdiff_t>(r[0]), v.begin() + static_cast<std::ptrdiff_t>(r[1])};
}

std::array<double, 2> finite_range(const std::vector<std::vector<double>>& series) {
  std::vector<double> all;
  for (const auto& s : series)
    for (double v : s)
      if (std::isfinite(v)) all.push_back(v);
  if (all.empty()) return {0.0, 1.0};
  std::sort(all.begin(), all.end());
  // 1st to 99th percentile keeps node spikes from flattening the rest
  const double lo = all[all.size() / 100], hi = all[all.size() - 1 - all.size() / 100];
  const double pad = 0.05 * std::max(hi - lo, 1e-12);
  return {lo - pad, hi + pad};
}

std::size_t default_frame(const RunData& run, std::size_t count) {
  if (run.recipe == "eigenstates" || count <= 1) return 0;
  return (count - 1) / 4;
}

std::string streamline_figure(const RunData& run, const RenderSpec& spec) {
  if (run.dims != 1) throw Error("precondition", "streamline figures need a 1D run");
  if (spec.shading != "qka" && spec.shading != "qrkc") throw Error("precondition", "shading must be qka or qrkc");
  const Table& f = run.frames;
  const auto rows = frame_rows(f);
  if (rows.size() < 2) throw Error("precondition", "streamline figures need a time series");
  const auto x = slice(f["x"], rows[0]);
  const auto& t = f["t"];
  const std::string soft_col = spec.shading == "qka" ? "soft" : "soft_reduced";
  const std::string hard_col = spec.shading == "qka" ? "hard" : "hard_reduced";

  Panel p{85, 30, 610, 440, x.front(), x.back(), t[rows.front()[0]], t[rows.back()[0]]};
  if (spec.x_range) std::tie(p.x0, p.x1) = std::pair{(*spec.x_range)[0], (*spec.x_range)[1]};
  if (spec.y_range) std::tie(p.y0, p.y1) = std::pair{(*spec.y_range)[0], (*spec.y_range)[1]};
  Svg svg(720, 530);
  svg.add("<!-- shading: " + spec.shading + " -->");

  // one raster row per frame, one column per sample; runs of equal class merged
  const std::size_t nt = rows.size(), nx = x.size();
  auto edge = [](const std::vector<double>& v, std::size_t i) {
    if (i == 0) return v.front();
    if (i == v.size()) return v.back();
    return 0.5 * (v[i - 1] + v[i]);
  };
  std::vector<double> times(nt);
  for (std::size_t k = 0; k < nt; ++k) times[k] = t[rows[k][0]];
  svg.add("<g clip-path=\"url(#plot)\">");
  for (std::size_t k = 0; k < nt; ++k) {
    const double ya = p.sy(edge(times, k + 1)), yb = p.sy(edge(times, k));
    auto cls = [&](std::size_t i) {
      const std::size_t r = rows[k][0] + i;
      if (f["valid"][r] == 0) return 0;
      if (f[hard_col][r] != 0) return 2;
      return f[soft_col][r] != 0 ? 1 : 0;
    };
    for (std::size_t i = 0; i < nx;) {
      const int c = cls(i);
      std::size_t j = i + 1;
      while (j < nx && cls(j) == c) ++j;
      if (c != 0) {
        const double xa = p.sx(edge(x, i)), xb = p.sx(edge(x, j));
        svg.add("<rect class=\"shade-" + std::string(c == 2 ? "hard" : "soft") + "\" x=\"" + px(xa) + "\" y=\"" +
                px(ya) + "\" width=\"" + px(xb - xa) + "\" height=\"" + px(yb - ya) + "\" fill=\"" +
                (c == 2 ? hard_fill : soft_fill) + "\"/>");
      }
      i = j;
    }
  }
  svg.add("</g>");
  svg.frame(p, "x", "t", "plot");

  if (run.streamlines) {
    const Table& s = *run.streamlines;
    const auto& line = s["line"];
    for (std::size_t r = 0; r < line.size();) {
      std::size_t e = r;
      std::vector<double> lx, lt;
      while (e < line.size() && line[e] == line[r]) {
        lx.push_back(s["x"][e]);
        lt.push_back(s["t"][e]);
        ++e;
      }
      svg.curve(p, lx, lt, "#000", "plot");
      if (s["halted"][r] != 0)
        svg.add("<circle class=\"halted\" cx=\"" + px(p.sx(lx.back())) + "\" cy=\"" + px(p.sy(lt.back())) +
                "\" r=\"3\" fill=\"none\" stroke=\"#c0392b\"/>");
      r = e;
    }
  }
  for (const auto& n : run.nodes)
    if (n[0] >= std::min(p.y0, p.y1) && n[0] <= std::max(p.y0, p.y1))
      svg.add("<text class=\"node\" x=\"" + px(p.sx(n[1])) + "\" y=\"" + px(p.sy(n[0]) + 5) +
              "\" text-anchor=\"middle\" font-size=\"16\" fill=\"#c0392b\">*</text>");
  return svg.str();
}

std::string density_figure(const RunData& run, const RenderSpec& spec) {
  if (run.dims != 1) throw Error("precondition", "density figures need a 1D run");
  const Table& f = run.frames;
  const auto rows = frame_rows(f);
  const std::size_t k = spec.frame.value_or(default_frame(run, rows.size()));
  if (k >= rows.size()) throw Error("precondition", "frame " + std::to_string(k) + " is out of range");
  const auto x = slice(f["x"], rows[k]);
  const std::vector<std::pair<std::string, std::string>> names = {
      {"q", palette[0]}, {"k_a", palette[1]}, {"k_s", palette[2]}, {"q_r", palette[3]}, {"u", palette[4]}};
  std::vector<std::vector<double>> ys;
  for (const auto& n : names) ys.push_back(slice(f[n.first], rows[k]));
  const auto yr = spec.y_range.value_or(finite_range(ys));
  Panel p{85, 30, 610, 440, x.front(), x.back(), yr[0], yr[1]};
  if (spec.x_range) std::tie(p.x0, p.x1) = std::pair{(*spec.x_range)[0], (*spec.x_range)[1]};
  Svg svg(720, 530);
  svg.frame(p, "x", "energy density (t = " + label(f["t"][rows[k][0]]) + ")", "plot");
  for (std::size_t i = 0; i < names.size(); ++i) svg.curve(p, x, ys[i], names[i].second, "plot");
  svg.legend(p, names);
  return svg.str();
}

std::string landscape_figure(const RunData& run, const RenderSpec& spec) {
  if (run.dims != 1) throw Error("precondition", "potential landscapes need a 1D run");
  const Table& f = run.frames;
  const auto rows = frame_rows(f);
  const std::size_t k = spec.frame.value_or(default_frame(run, rows.size()));
  if (k >= rows.size()) throw Error("precondition", "frame " + std::to_string(k) + " is out of range");
  const auto x = slice(f["x"], rows[k]);
  const auto ka = slice(f["K_a"], rows[k]);
  const auto q = slice(f["Q"], rows[k]);
  const auto u = slice(f["U"], rows[k]);
  std::vector<double> qu(x.size()), band(x.size(), run.band_limit);
  for (std::size_t i = 0; i < x.size(); ++i) qu[i] = q[i] + u[i];
  auto yr = spec.y_range.value_or(finite_range({ka, qu, band}));
  Panel p{85, 30, 610, 440, x.front(), x.back(), yr[0], yr[1]};
  if (spec.x_range) std::tie(p.x0, p.x1) = std::pair{(*spec.x_range)[0], (*spec.x_range)[1]};
  Svg svg(720, 530);
  svg.frame(p, "x", "energy per particle (t = " + label(f["t"][rows[k][0]]) + ")", "plot");
  svg.curve(p, x, ka, palette[1], "plot");
  svg.curve(p, x, qu, palette[0], "plot");
  svg.curve(p, x, u, "#555", "plot");
  svg.curve(p, x, band, "#000", "plot", " stroke-dasharray=\"4 3\"");
  svg.legend(p, {{"K_a", palette[1]}, {"Q + U", palette[0]}, {"U", "#555"}, {"E_+", "#000"}});
  return svg.str();
}

std::string vortex_figure(const RunData& run, const RenderSpec& spec) {
  if (!run.vortex_profile) throw Error("precondition", "vortex figures need a vortex_profile.csv");
  const Table& v = *run.vortex_profile;
  const auto& r = v["r"];
  std::vector<double> minus_q(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) minus_q[i] = -v["Q"][i];
  Svg svg(980, 500);
  double lo = HUGE_VAL, hi = 0.0;
  for (const auto* s : std::vector<const std::vector<double>*>{&v["K_a"], &minus_q})
    for (double y : *s)
      if (y > 0 && std::isfinite(y)) lo = std::min(lo, y), hi = std::max(hi, y);
  if (!(hi > 0)) lo = 1, hi = 10;
  Panel a{85, 30, 365, 400, std::log10(r.front()), std::log10(r.back()), std::log10(lo) - 0.1, std::log10(hi) + 0.1};
  a.log_x = a.log_y = true;
  svg.frame(a, "r", "radial average", "radial");
  svg.curve(a, r, v["K_a"], palette[1], "radial");
  svg.curve(a, r, minus_q, palette[0], "radial", " stroke-dasharray=\"4 3\"");
  svg.legend(a, {{"K_a", palette[1]}, {"-Q", palette[0]}});

  const Table& f = run.frames;
  const auto& fx = f["x"];
  const auto& fy = f["y"];
  Panel b{560, 30, 400, 400, *std::min_element(fx.begin(), fx.end()), *std::max_element(fx.begin(), fx.end()),
          *std::min_element(fy.begin(), fy.end()), *std::max_element(fy.begin(), fy.end())};
  if (spec.x_range) std::tie(b.x0, b.x1) = std::pair{(*spec.x_range)[0], (*spec.x_range)[1]};
  if (spec.y_range) std::tie(b.y0, b.y1) = std::pair{(*spec.y_range)[0], (*spec.y_range)[1]};
  // density as a gray map of the sampled points
  const auto& rho = f["rho"];
  double rmax = 0.0;
  for (double d : rho) rmax = std::max(rmax, d);
  double cell = HUGE_VAL;
  for (std::size_t i = 1; i < fy.size(); ++i)
    if (fy[i] > fy[i - 1]) cell = std::min(cell, fy[i] - fy[i - 1]);
  const double w = b.width / (b.x1 - b.x0) * cell, h = b.height / (b.y1 - b.y0) * cell;
  svg.add("<g clip-path=\"url(#plane)\">");
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const int g = 255 - static_cast<int>(std::lround(120.0 * rho[i] / rmax));
    char color[8];
    std::snprintf(color, sizeof color, "#%02x%02x%02x", g, g, g);
    svg.add("<rect x=\"" + px(b.sx(fx[i]) - w / 2) + "\" y=\"" + px(b.sy(fy[i]) - h / 2) + "\" width=\"" + px(w) +
            "\" height=\"" + px(h) + "\" fill=\"" + color + "\"/>");
  }
  svg.add("</g>");
  svg.frame(b, "x", "y", "plane");
  if (run.loops) {
    const Table& l = *run.loops;
    const auto& id = l["loop"];
    for (std::size_t s = 0; s < id.size();) {
      std::size_t e = s;
      std::vector<double> lx, ly;
      while (e < id.size() && id[e] == id[s]) lx.push_back(l["x"][e]), ly.push_back(l["y"][e]), ++e;
      svg.curve(b, lx, ly, "#000", "plane");
      s = e;
    }
  }
  for (const auto& n : run.nodes)
    svg.add("<text class=\"node\" x=\"" + px(b.sx(n[0])) + "\" y=\"" + px(b.sy(n[1]) + 5) +
            "\" text-anchor=\"middle\" font-size=\"16\" fill=\"#c0392b\">*</text>");
  return svg.str();
}

}  // namespace

const std::vector<double>& Table::operator[](const std::string& name) const {
  const auto it = data.find(name);
  if (it == data.end()) throw Error("parse", "table has no column '" + name + "'");
  return it->second;
}

std::size_t Table::rows() const { return data.empty() ? 0 : data.begin()->second.size(); }

Table read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot read " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw Error("parse", path.string() + " is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      t.columns.push_back(cell);
      t.data[cell];
    }
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= t.columns.size()) break;
      t.data[t.columns[c++]].push_back(parse_cell(cell));
    }
    if (c != t.columns.size())
      throw Error("parse", path.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(t.columns.size()) + " cells");
  }
  return t;
}

RunData load_run(const fs::path& dir) {
  const auto manifest = read_json(dir / "manifest.json");
  RunData run;
  run.dims = manifest.at("dims");
  run.recipe = manifest.at("config").at("recipe");
  run.band_limit = manifest.value("band_limit", 0.0);
  run.frames = read_table(dir / "frames.csv");
  if (fs::exists(dir / "streamlines.csv")) run.streamlines = read_table(dir / "streamlines.csv");
  if (fs::exists(dir / "vortex_profile.csv")) run.vortex_profile = read_table(dir / "vortex_profile.csv");
  if (fs::exists(dir / "loops.csv")) run.loops = read_table(dir / "loops.csv");
  if (fs::exists(dir / "nodes.json")) {
    const auto nodes = read_json(dir / "nodes.json");
    for (const auto& e : nodes.at("events")) {
      if (run.dims == 2)
        run.nodes.push_back({e.at("x"), e.at("y")});
      else if (e.at("isolated"))
        run.nodes.push_back({e.at("t"), e.at("x")});
    }
  }
  return run;
}

std::string render_svg(const RunData& run, const RenderSpec& spec) {
  if (spec.kind == "streamlines") return streamline_figure(run, spec);
  if (spec.kind == "densities") return density_figure(run, spec);
  if (spec.kind == "potential_landscape") return landscape_figure(run, spec);
  if (spec.kind == "vortex") return vortex_figure(run, spec);
  throw Error("precondition", "unknown figure kind '" + spec.kind + "'");
}

double shaded_area(const std::string& svg) {
  static const std::regex rect(R"re(<rect class="shade-(?:soft|hard)"[^>]*width="([0-9.]+)" height="([0-9.]+)")re");
  double area = 0.0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), rect); it != std::sregex_iterator(); ++it)
    area += std::stod((*it)[1]) * std::stod((*it)[2]);
  return area;
}

std::vector<std::pair<std::string, RenderSpec>> default_figures(const RunData& run) {
  std::vector<std::pair<std::string, RenderSpec>> out;
  if (run.dims == 2) {
    out.push_back({"vortex.svg", {"vortex", "qka", {}, {}, {}}});
    return out;
  }
  if (run.recipe != "eigenstates") {
    out.push_back({"streamlines_qka.svg", {"streamlines", "qka", {}, {}, {}}});
    out.push_back({"streamlines_qrkc.svg", {"streamlines", "qrkc", {}, {}, {}}});
  }
  if (run.recipe == "eigenstates") {
    // one snapshot per state
    const std::size_t count = frame_rows(run.frames).size();
    for (std::size_t k = 0; k < count; ++k) {
      out.push_back({"densities_" + std::to_string(k) + ".svg", {"densities", "qka", {}, {}, k}});
      out.push_back({"potential_landscape_" + std::to_string(k) + ".svg", {"potential_landscape", "qka", {}, {}, k}});
    }
    return out;
  }
  out.push_back({"densities.svg", {"densities", "qka", {}, {}, {}}});
  out.push_back({"potential_landscape.svg", {"potential_landscape", "qka", {}, {}, {}}});
  return out;
}

}  // namespace madelung
