#pragma once

// Text forms of run results (CSV / JSON) with fixed number formatting.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "madelung/flow.hpp"
#include "madelung/scenarios.hpp"

namespace madelung {

void write_text(const std::filesystem::path& p, const std::string& text);

/// One row per sampled grid point per frame: positions, density, both
/// ledgers and the masks. Every `stride`-th point per axis, plus the last.
std::string frames_csv(const std::vector<Frame>& frames, std::size_t stride);
std::string streamlines_csv(const std::vector<Streamline>& lines);
std::string nodes_json(const std::vector<NodeEvent>& events, std::array<double, 2> window);
std::string vortex_profile_csv(const VortexProfile& v);
std::string loops_csv(const std::vector<std::vector<std::array<double, 2>>>& loops);
std::string tuning_json(const TuningResult& t);
std::string summaries_json(const std::vector<Frame>& frames);

}  // namespace madelung
