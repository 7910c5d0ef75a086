#pragma once

#include <span>
#include <vector>

#include "heatplan/gridmap.hpp"

namespace heatplan::heat {

struct SolverParams {
  // Per-step conductivity in free cells. Must lie in (0, 1/4].
  double coeff = 0.25;
  // Dispersion time advanced by one step.
  double dk = 0.25;

  void validate() const;
};

// Non-negative scalar field over a grid, row-major.
class HeatField {
 public:
  HeatField(int width, int height);
  HeatField(int width, int height, std::vector<double> values);

  static HeatField delta(int width, int height, const Cell& c, double mass = 1.0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double at(const Cell& c) const { return values_[static_cast<std::size_t>(c.y) * width_ + c.x]; }
  double& at(const Cell& c) { return values_[static_cast<std::size_t>(c.y) * width_ + c.x]; }
  double total_mass() const;

 private:
  int width_;
  int height_;
  std::vector<double> values_;
};

// Checks values >= 0 and zero on obstacles.
bool satisfies_invariants(const HeatField& field, const grid::GridMap& map);

// n_steps of the masked explicit update. Obstacles and the map border are insulators.
HeatField evolve(const HeatField& field, const grid::GridMap& map, int n_steps, const SolverParams& params = {});
void evolve_in_place(HeatField& field, const grid::GridMap& map, int n_steps, const SolverParams& params = {});

// round(k / dk)
int steps_for_dispersion_time(double k, const SolverParams& params = {});

}  // namespace heatplan::heat
