#pragma once

#include <span>
#include <vector>

#include "heatplan/kernel.hpp"

namespace heatplan::score {

inline constexpr double kDefaultFloor = 1e-12;

// Per-cell gradient of log p, units 1/cell.
class ScoreField {
 public:
  ScoreField(int width, int height, std::vector<Vec2> vectors, double floor = kDefaultFloor);

  int width() const { return width_; }
  int height() const { return height_; }
  double floor() const { return floor_; }
  std::span<const Vec2> vectors() const { return vectors_; }
  const Vec2& at(const Cell& c) const { return vectors_[static_cast<std::size_t>(c.y) * width_ + c.x]; }

 private:
  int width_;
  int height_;
  std::vector<Vec2> vectors_;
  double floor_;
};

// Central differences of log(max(p, floor)), one-sided on the outer edge.
ScoreField score_field(std::span<const double> p, int width, int height, double floor = kDefaultFloor);
ScoreField score_field(const kernel::ProbabilityField& p, double floor = kDefaultFloor);

// Bilinear interpolation over a row-major grid of 2-vectors. Throws outside [0, w-1] x [0, h-1].
Vec2 bilinear(std::span<const Vec2> grid, int width, int height, const State& s);
Vec2 score_at(const ScoreField& field, const State& s);

// Four bilinear taps of s: cell indices and weights.
struct BilinearTaps {
  std::size_t index[4];
  double weight[4];
};
BilinearTaps bilinear_taps(int width, int height, const State& s);

// Score of sum_i w_i N(s; mu_i, sigma^2 I).
Vec2 analytic_gaussian_score(const State& s, std::span<const State> means, double sigma,
                             std::span<const double> weights);

}  // namespace heatplan::score
