#include "heatplan/score.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace heatplan::score {

ScoreField::ScoreField(int width, int height, std::vector<Vec2> vectors, double floor)
    : width_(width), height_(height), vectors_(std::move(vectors)), floor_(floor) {
  if (width < 2 || height < 2) throw InvalidArgument("ScoreField: needs at least 2x2 cells");
  if (vectors_.size() != static_cast<std::size_t>(width) * height)
    throw InvalidArgument("ScoreField: vector count does not match dimensions");
}

ScoreField score_field(std::span<const double> p, int width, int height, double floor) {
  if (!(floor > 0.0)) throw InvalidArgument("score_field: floor must be positive");
  if (p.size() != static_cast<std::size_t>(width) * height) throw InvalidArgument("score_field: size mismatch");
  std::vector<double> lp(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) lp[i] = std::log(std::max(p[i], floor));
  auto L = [&](int x, int y) { return lp[static_cast<std::size_t>(y) * width + x]; };
  std::vector<Vec2> v(p.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double gx, gy;
      if (x == 0)
        gx = L(1, y) - L(0, y);
      else if (x == width - 1)
        gx = L(x, y) - L(x - 1, y);
      else
        gx = 0.5 * (L(x + 1, y) - L(x - 1, y));
      if (y == 0)
        gy = L(x, 1) - L(x, 0);
      else if (y == height - 1)
        gy = L(x, y) - L(x, y - 1);
      else
        gy = 0.5 * (L(x, y + 1) - L(x, y - 1));
      v[static_cast<std::size_t>(y) * width + x] = {gx, gy};
    }
  }
  return {width, height, std::move(v), floor};
}

ScoreField score_field(const kernel::ProbabilityField& p, double floor) {
  return score_field(p.values(), p.width(), p.height(), floor);
}

BilinearTaps bilinear_taps(int width, int height, const State& s) {
  if (!(s.x >= 0.0 && s.y >= 0.0 && s.x <= width - 1.0 && s.y <= height - 1.0))
    throw InvalidArgument("score query (" + std::to_string(s.x) + ", " + std::to_string(s.y) + ") outside the domain");
  const int x0 = std::min(static_cast<int>(s.x), width - 2);
  const int y0 = std::min(static_cast<int>(s.y), height - 2);
  const double fx = s.x - x0;
  const double fy = s.y - y0;
  const std::size_t i00 = static_cast<std::size_t>(y0) * width + x0;
  const std::size_t w = static_cast<std::size_t>(width);
  return {{i00, i00 + 1, i00 + w, i00 + w + 1},
          {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy}};
}

Vec2 bilinear(std::span<const Vec2> grid, int width, int height, const State& s) {
  const auto taps = bilinear_taps(width, height, s);
  Vec2 out;
  for (int k = 0; k < 4; ++k) out += taps.weight[k] * grid[taps.index[k]];
  return out;
}

Vec2 score_at(const ScoreField& field, const State& s) {
  return bilinear(field.vectors(), field.width(), field.height(), s);
}

Vec2 analytic_gaussian_score(const State& s, std::span<const State> means, double sigma,
                             std::span<const double> weights) {
  if (!(sigma > 0.0)) throw InvalidArgument("analytic_gaussian_score: sigma must be positive");
  if (means.empty() || means.size() != weights.size())
    throw InvalidArgument("analytic_gaussian_score: means and weights must be nonempty and equal length");
  const double s2 = sigma * sigma;
  // Log-sum-exp responsibilities.
  std::vector<double> logw(means.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < means.size(); ++i) {
    const Vec2 d = s - means[i];
    logw[i] = (weights[i] > 0.0 ? std::log(weights[i]) : -std::numeric_limits<double>::infinity()) - d.dot(d) / (2 * s2);
    mx = std::max(mx, logw[i]);
  }
  double z = 0.0;
  Vec2 acc;
  for (std::size_t i = 0; i < means.size(); ++i) {
    const double r = std::exp(logw[i] - mx);
    z += r;
    acc += (-r / s2) * (s - means[i]);
  }
  return (1.0 / z) * acc;
}

}  // namespace heatplan::score
