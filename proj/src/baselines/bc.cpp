#include "heatplan/baselines/bc.hpp"

#include <cmath>
#include <limits>
#include <queue>

namespace heatplan::baselines {

BCFieldModel::BCFieldModel(int width, int height, std::vector<Vec2> field, int stationary_number)
    : width_(width), height_(height), field_(std::move(field)), stationary_number_(stationary_number) {
  if (field_.size() != static_cast<std::size_t>(width) * height) throw InvalidArgument("BCFieldModel: size mismatch");
}

Vec2 BCFieldModel::query(const State& s) const { return score::bilinear(field_, width_, height_, s); }

BCFieldModel bc_fit(std::span<const sampler::Trajectory> experts, int width, int height) {
  std::vector<Vec2> sum(static_cast<std::size_t>(width) * height);
  std::vector<double> count(sum.size(), 0.0);
  std::size_t pairs = 0;
  for (const auto& traj : experts) {
    for (std::size_t i = 0; i + 1 < traj.states.size(); ++i) {
      const Cell c = cell_of(traj.states[i]);
      if (c.x < 0 || c.y < 0 || c.x >= width || c.y >= height) continue;
      const auto idx = static_cast<std::size_t>(c.y) * width + c.x;
      sum[idx] += traj.states[i + 1] - traj.states[i];
      count[idx] += 1.0;
      ++pairs;
    }
  }
  if (pairs == 0) throw InvalidArgument("bc_fit: no expert transitions");
  for (std::size_t i = 0; i < sum.size(); ++i)
    if (count[i] > 0.0) sum[i] = (1.0 / count[i]) * sum[i];
  return {width, height, std::move(sum)};
}

namespace {

constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

bool move_allowed(const grid::GridMap& map, const Cell& c, int d) {
  const Cell n{c.x + kDx[d], c.y + kDy[d]};
  if (!map.is_free(n)) return false;
  if (kDx[d] != 0 && kDy[d] != 0) return map.is_free({n.x, c.y}) && map.is_free({c.x, n.y});
  return true;
}

std::vector<double> distance_to(const grid::GridMap& map, const Cell& goal) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(map.cell_count(), inf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[map.index(goal)] = 0.0;
  pq.push({0.0, map.index(goal)});
  while (!pq.empty()) {
    const auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[i]) continue;
    const Cell c = map.cell_at(i);
    // Moves are symmetric, so the reverse search gives distances to the goal.
    for (int k = 0; k < 8; ++k) {
      if (!move_allowed(map, c, k)) continue;
      const std::size_t j = map.index({c.x + kDx[k], c.y + kDy[k]});
      const double nd = d + ((kDx[k] != 0 && kDy[k] != 0) ? std::sqrt(2.0) : 1.0);
      if (nd < dist[j]) {
        dist[j] = nd;
        pq.push({nd, j});
      }
    }
  }
  return dist;
}

}  // namespace

std::vector<sampler::Trajectory> geodesic_experts(const grid::Scenario& scenario) {
  const auto& map = scenario.map;
  std::vector<sampler::Trajectory> out;
  for (const auto& goal : scenario.goals) {
    if (!map.is_free(goal.cell)) continue;
    const auto dist = distance_to(map, goal.cell);
    for (std::size_t i = 0; i < map.cell_count(); ++i) {
      if (!std::isfinite(dist[i])) continue;
      const Cell c = map.cell_at(i);
      sampler::Trajectory demo;
      demo.states.push_back(center_of(c));
      if (c == goal.cell) {
        demo.states.push_back(center_of(c));
      } else {
        int best = -1;
        double best_d = dist[i];
        for (int k = 0; k < 8; ++k) {
          if (!move_allowed(map, c, k)) continue;
          const double nd = dist[map.index({c.x + kDx[k], c.y + kDy[k]})];
          if (nd < best_d) {
            best_d = nd;
            best = k;
          }
        }
        if (best < 0) continue;
        demo.states.push_back(center_of({c.x + kDx[best], c.y + kDy[best]}));
      }
      out.push_back(std::move(demo));
    }
  }
  return out;
}

sampler::Trajectory bc_rollout(const BCFieldModel& model, const grid::Scenario& scenario, const State& x_init,
                               int n_steps) {
  const auto& map = scenario.map;
  if (model.width() != map.width() || model.height() != map.height())
    throw InvalidArgument("bc_rollout: model does not match the map");
  if (!map.state_is_free(x_init)) throw InvalidArgument("bc_rollout: x_init is not in a free cell");
  if (n_steps < 0) throw InvalidArgument("bc_rollout: n_steps must be >= 0");
  sampler::Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.states.push_back(x_init);
  State s = x_init;
  for (int i = 0; i < n_steps; ++i) {
    const State next = s + model.query(s);
    ++traj.proposals;
    if (!map.state_is_free(next)) {
      ++traj.rejections;
      traj.frozen = true;
      traj.steps.push_back({0, false, 1, true});
      break;
    }
    traj.steps.push_back({0, true, 0, false});
    s = next;
    traj.states.push_back(s);
  }
  return traj;
}

}  // namespace heatplan::baselines
