#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heatplan/gridmap.hpp"

namespace heatplan::baselines {

struct RRTStarConfig {
  int max_iterations = 5000;
  double step_size = 2.0;
  double neighborhood_radius = 6.0;
  double goal_bias = 0.05;
  std::uint64_t seed = 0;
  // Stop at the first connection to the goal instead of refining until max_iterations.
  bool stop_at_first_solution = false;

  void validate() const;
};

struct RRTNode {
  State s;
  int parent = -1;
  double cost = 0.0;
};

struct RRTResult {
  bool success = false;
  std::vector<State> path;
  double cost = 0.0;
  int iterations = 0;
  std::vector<RRTNode> tree;
};

using grid::segment_free;

RRTResult rrt_star(const grid::GridMap& map, const State& start, const State& goal, const RRTStarConfig& config);

// {"nodes":[{"x":..,"y":..,"parent":..,"cost":..}]}
std::string rrt_tree_json(const RRTResult& result);

}  // namespace heatplan::baselines
