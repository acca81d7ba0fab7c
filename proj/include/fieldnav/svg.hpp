#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fieldnav/routing.hpp"
#include "fieldnav/simulation.hpp"

namespace fieldnav {

// Field targets as green stars, the sampled reference path as a red polyline
// with heading ticks, and (optionally) the closed-loop trajectory in blue.
std::string render_svg(const Field& field, const std::vector<ReferencePath>& segments,
                       const MissionLog* log = nullptr);

void write_svg(const std::filesystem::path& file, const std::string& svg);

}  // namespace fieldnav
