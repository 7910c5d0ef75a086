#pragma once

#include <span>
#include <vector>

#include "heatplan/gridmap.hpp"
#include "heatplan/sampler.hpp"

namespace heatplan::baselines {

// Per-cell mean expert displacement, queried bilinearly.
class BCFieldModel {
 public:
  BCFieldModel(int width, int height, std::vector<Vec2> field, int stationary_number = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  // Carried for interface parity; the tabulated model ignores it.
  int stationary_number() const { return stationary_number_; }
  std::span<const Vec2> field() const { return field_; }
  const Vec2& at(const Cell& c) const { return field_[static_cast<std::size_t>(c.y) * width_ + c.x]; }
  Vec2 query(const State& s) const;

 private:
  int width_;
  int height_;
  std::vector<Vec2> field_;
  int stationary_number_;
};

// Each consecutive pair of states contributes states[i+1] - states[i] to cell_of(states[i]).
BCFieldModel bc_fit(std::span<const sampler::Trajectory> experts, int width, int height);

// One-step demonstrations of the shortest-path policy toward each goal: 8-connected moves, no
// corner cutting, from every free cell that can reach the goal; the goal cell itself demonstrates
// staying put.
std::vector<sampler::Trajectory> geodesic_experts(const grid::Scenario& scenario);

// x <- x + model(x). A step that leaves the free space freezes the rollout.
sampler::Trajectory bc_rollout(const BCFieldModel& model, const grid::Scenario& scenario, const State& x_init,
                               int n_steps);

}  // namespace heatplan::baselines
