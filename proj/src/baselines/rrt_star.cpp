#include "heatplan/baselines/rrt_star.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace heatplan::baselines {

void RRTStarConfig::validate() const {
  if (max_iterations < 1) throw InvalidArgument("rrt max_iterations must be >= 1");
  if (!(step_size > 0.0)) throw InvalidArgument("rrt step_size must be > 0");
  if (!(neighborhood_radius > 0.0)) throw InvalidArgument("rrt neighborhood_radius must be > 0");
  if (!(goal_bias >= 0.0 && goal_bias < 1.0)) throw InvalidArgument("rrt goal_bias must lie in [0, 1)");
}

namespace {

// Uniform bucket grid over the map for radius and nearest queries.
class NodeIndex {
 public:
  NodeIndex(int width, int height, double bucket)
      : bucket_(bucket),
        nx_(static_cast<int>(std::ceil(width / bucket)) + 1),
        ny_(static_cast<int>(std::ceil(height / bucket)) + 1),
        cells_(static_cast<std::size_t>(nx_) * ny_) {}

  void insert(int id, const State& s) { cells_[slot(bx(s.x), by(s.y))].push_back(id); }

  int nearest(const std::vector<RRTNode>& nodes, const State& q) const {
    const int cx = bx(q.x), cy = by(q.y);
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int ring = 0; ring <= std::max(nx_, ny_); ++ring) {
      // Anything outside this ring is at least (ring - 1) * bucket away... once we have a hit
      // closer than that, stop.
      if (best >= 0) {
        const double lim = (ring - 1) * bucket_;
        if (lim > 0 && lim * lim > best_d2) break;
      }
      for (int y = cy - ring; y <= cy + ring; ++y) {
        for (int x = cx - ring; x <= cx + ring; ++x) {
          if (std::max(std::abs(x - cx), std::abs(y - cy)) != ring) continue;
          if (x < 0 || y < 0 || x >= nx_ || y >= ny_) continue;
          for (const int id : cells_[slot(x, y)]) {
            const Vec2 d = nodes[id].s - q;
            const double d2 = d.dot(d);
            if (d2 < best_d2 || (d2 == best_d2 && id < best)) {
              best_d2 = d2;
              best = id;
            }
          }
        }
      }
    }
    return best;
  }

  void within(const std::vector<RRTNode>& nodes, const State& q, double r, std::vector<int>& out) const {
    out.clear();
    const int span = static_cast<int>(std::ceil(r / bucket_));
    const int cx = bx(q.x), cy = by(q.y);
    for (int y = std::max(0, cy - span); y <= std::min(ny_ - 1, cy + span); ++y)
      for (int x = std::max(0, cx - span); x <= std::min(nx_ - 1, cx + span); ++x)
        for (const int id : cells_[slot(x, y)]) {
          const Vec2 d = nodes[id].s - q;
          if (d.dot(d) <= r * r) out.push_back(id);
        }
    std::sort(out.begin(), out.end());
  }

 private:
  int bx(double x) const { return std::clamp(static_cast<int>(std::floor((x + 0.5) / bucket_)), 0, nx_ - 1); }
  int by(double y) const { return std::clamp(static_cast<int>(std::floor((y + 0.5) / bucket_)), 0, ny_ - 1); }
  std::size_t slot(int x, int y) const { return static_cast<std::size_t>(y) * nx_ + x; }

  double bucket_;
  int nx_;
  int ny_;
  std::vector<std::vector<int>> cells_;
};

double dist(const State& a, const State& b) { return (b - a).norm(); }

}  // namespace

RRTResult rrt_star(const grid::GridMap& map, const State& start, const State& goal, const RRTStarConfig& config) {
  config.validate();
  if (!map.state_is_free(start)) throw InvalidArgument("rrt_star: start is not free");
  if (!map.state_is_free(goal)) throw InvalidArgument("rrt_star: goal is not free");

  RRTResult result;
  auto& nodes = result.tree;
  std::vector<std::vector<int>> children;
  NodeIndex index(map.width(), map.height(), config.neighborhood_radius);
  nodes.push_back({start, -1, 0.0});
  children.emplace_back();
  index.insert(0, start);

  // Nodes with a free straight segment to the goal, with that segment's length.
  std::vector<std::pair<int, double>> connectors;
  auto try_connect = [&](int id) {
    const double d = dist(nodes[id].s, goal);
    if (d <= config.step_size && segment_free(map, nodes[id].s, goal)) connectors.push_back({id, d});
  };
  try_connect(0);

  Rng rng(config.seed);
  std::vector<int> near;
  std::vector<std::pair<double, int>> order;
  const double hi_x = map.width() - 1.0;
  const double hi_y = map.height() - 1.0;

  int iter = 0;
  for (; iter < config.max_iterations; ++iter) {
    if (config.stop_at_first_solution && !connectors.empty()) break;
    State q = rng.uniform() < config.goal_bias ? goal : State{rng.uniform(0.0, hi_x), rng.uniform(0.0, hi_y)};
    const int nn = index.nearest(nodes, q);
    const double d = dist(nodes[nn].s, q);
    if (d <= 1e-12) continue;
    const State x_new = d <= config.step_size ? q : nodes[nn].s + (config.step_size / d) * (q - nodes[nn].s);
    if (!map.state_is_free(x_new)) continue;

    index.within(nodes, x_new, config.neighborhood_radius, near);
    order.clear();
    for (const int id : near) order.push_back({nodes[id].cost + dist(nodes[id].s, x_new), id});
    std::sort(order.begin(), order.end());
    int parent = -1;
    double cost = 0.0;
    for (const auto& [c, id] : order) {
      if (segment_free(map, nodes[id].s, x_new)) {
        parent = id;
        cost = c;
        break;
      }
    }
    if (parent < 0) continue;

    const int id_new = static_cast<int>(nodes.size());
    nodes.push_back({x_new, parent, cost});
    children.emplace_back();
    children[parent].push_back(id_new);
    index.insert(id_new, x_new);

    for (const int id : near) {
      if (id == parent) continue;
      const double c = cost + dist(x_new, nodes[id].s);
      if (c + 1e-12 >= nodes[id].cost) continue;
      if (!segment_free(map, x_new, nodes[id].s)) continue;
      auto& sib = children[nodes[id].parent];
      sib.erase(std::find(sib.begin(), sib.end(), id));
      nodes[id].parent = id_new;
      children[id_new].push_back(id);
      const double delta = c - nodes[id].cost;
      std::vector<int> stack{id};
      while (!stack.empty()) {
        const int k = stack.back();
        stack.pop_back();
        nodes[k].cost += delta;
        for (const int ch : children[k]) stack.push_back(ch);
      }
    }
    try_connect(id_new);
  }
  result.iterations = iter;

  if (connectors.empty()) return result;
  int best = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (const auto& [id, d] : connectors) {
    if (nodes[id].cost + d < best_cost) {
      best_cost = nodes[id].cost + d;
      best = id;
    }
  }
  result.success = true;
  result.cost = best_cost;
  for (int k = best; k >= 0; k = nodes[k].parent) result.path.push_back(nodes[k].s);
  std::reverse(result.path.begin(), result.path.end());
  if (!(result.path.back() == goal)) result.path.push_back(goal);
  return result;
}

std::string rrt_tree_json(const RRTResult& result) {
  nlohmann::ordered_json j;
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& n : result.tree)
    nodes.push_back({{"x", n.s.x}, {"y", n.s.y}, {"parent", n.parent}, {"cost", n.cost}});
  j["nodes"] = std::move(nodes);
  return j.dump();
}

}  // namespace heatplan::baselines
