#pragma once

#include <span>
#include <string>
#include <vector>

#include "heatplan/gridmap.hpp"
#include "heatplan/sampler.hpp"

namespace heatplan::cli {

// Binary PPM, one pixel per cell. Free cells are white, or follow the field ramp when a field is
// given; obstacles are black; trajectory states are red; goals are green plus-shaped crosses.
std::string render_ppm(const grid::GridMap& map, std::span<const grid::Goal> goals, const std::vector<double>* field,
                       std::span<const sampler::Trajectory> trajectories);

}  // namespace heatplan::cli
