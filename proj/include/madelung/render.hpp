#pragma once

// Static SVG figures drawn from the files of a run directory, so a figure can
// be redrawn without recomputing the run.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace madelung {

/// Numeric CSV with a header row; "nan" cells are NaN.
struct Table {
  std::vector<std::string> columns;
  std::map<std::string, std::vector<double>> data;

  const std::vector<double>& operator[](const std::string& name) const;
  std::size_t rows() const;
  bool has(const std::string& name) const { return data.count(name) != 0; }
};

Table read_table(const std::filesystem::path& path);

struct RunData {
  std::size_t dims = 1;
  std::string recipe;
  double band_limit = 0.0;
  Table frames;
  std::optional<Table> streamlines;
  std::vector<std::array<double, 2>> nodes;  ///< (t, x) of isolated events
  std::optional<Table> vortex_profile;
  std::optional<Table> loops;
};

RunData load_run(const std::filesystem::path& dir);

struct RenderSpec {
  std::string kind = "streamlines";  ///< streamlines | densities | potential_landscape | vortex
  std::string shading = "qka";       ///< qka | qrkc
  std::optional<std::array<double, 2>> x_range;
  std::optional<std::array<double, 2>> y_range;
  std::optional<std::size_t> frame;  ///< snapshot figures: frame index (default: a quarter into the run)
};

std::string render_svg(const RunData& run, const RenderSpec& spec);

/// Total area of the superoscillation shading rectangles of a streamline
/// figure, in SVG pixel units.
double shaded_area(const std::string& svg);

/// Figure set for a run: file name and spec, depending on what the run holds.
std::vector<std::pair<std::string, RenderSpec>> default_figures(const RunData& run);

}  // namespace madelung
