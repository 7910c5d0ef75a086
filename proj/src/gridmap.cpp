#include "heatplan/gridmap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <limits>

#include "json.hpp"

namespace heatplan::grid {

GridMap::GridMap(int width, int height) : GridMap(width, height, {}) {}

GridMap::GridMap(int width, int height, std::vector<std::uint8_t> obstacle_mask)
    : width_(width), height_(height), obstacle_(std::move(obstacle_mask)) {
  if (width < kMinSide || height < kMinSide) {
    throw InvalidArgument("GridMap: width and height must be >= 4, got " + std::to_string(width) + "x" +
                          std::to_string(height));
  }
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (obstacle_.empty()) obstacle_.assign(n, 0);
  if (obstacle_.size() != n) throw InvalidArgument("GridMap: mask size does not match dimensions");
  for (auto& v : obstacle_) v = v ? 1 : 0;
}

bool GridMap::state_is_free(const State& s) const { return state_in_domain(s) && is_free(cell_of(s)); }

std::size_t GridMap::free_count() const {
  return static_cast<std::size_t>(std::count(obstacle_.begin(), obstacle_.end(), std::uint8_t{0}));
}

std::vector<Cell> CellRect::cells() const {
  std::vector<Cell> out;
  out.reserve(static_cast<std::size_t>(std::max(0, w * h)));
  for (int j = y; j < y + h; ++j)
    for (int i = x; i < x + w; ++i) out.push_back({i, j});
  return out;
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kUnimodal: return "unimodal";
    case ScenarioKind::kMultimodal: return "multimodal";
    case ScenarioKind::kUnreachable: return "unreachable";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "unimodal") return ScenarioKind::kUnimodal;
  if (name == "multimodal") return ScenarioKind::kMultimodal;
  if (name == "unreachable") return ScenarioKind::kUnreachable;
  throw InvalidArgument("unknown scenario kind '" + name + "'");
}

std::vector<Cell> Scenario::goal_cells(bool reachable_only) const {
  std::vector<Cell> out;
  for (const auto& g : goals)
    if (!reachable_only || g.reachable) out.push_back(g.cell);
  return out;
}

State Scenario::draw_initial_state(Rng& rng) const {
  const Cell c{initial_region.x + rng.uniform_int(0, initial_region.w - 1),
               initial_region.y + rng.uniform_int(0, initial_region.h - 1)};
  State s{c.x + rng.uniform(-0.5, 0.5), c.y + rng.uniform(-0.5, 0.5)};
  s.x = std::clamp(s.x, 0.0, map.width() - 1.0);
  s.y = std::clamp(s.y, 0.0, map.height() - 1.0);
  return s;
}

void MapGenConfig::validate() const {
  if (width < GridMap::kMinSide || height < GridMap::kMinSide) throw InvalidArgument("map dimensions must be >= 4");
  if (!(noise_density >= 0.0 && noise_density <= 1.0)) throw InvalidArgument("noise_density must lie in [0, 1]");
  if (n_obstacles.min < 0 || n_obstacles.min > n_obstacles.max) throw InvalidArgument("n_obstacles range is empty");
  if (obstacle_size.min < 1 || obstacle_size.min > obstacle_size.max)
    throw InvalidArgument("obstacle_size range is empty");
  if (max_attempts < 1) throw InvalidArgument("max_attempts must be >= 1");
}

namespace {

constexpr int kInitialSide = 6;
constexpr int kRingRadius = 3;
constexpr int kGoalClearance = 2;

bool region_free(const GridMap& map, int cx, int cy, int radius) {
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (!map.is_free({cx + dx, cy + dy})) return false;
  return true;
}

void fill_rect(GridMap& map, int x, int y, int w, int h) {
  for (int j = std::max(0, y); j < std::min(map.height(), y + h); ++j)
    for (int i = std::max(0, x); i < std::min(map.width(), x + w); ++i) map.set_obstacle({i, j}, true);
}

void remove_isolated_obstacles(GridMap& map) {
  std::vector<Cell> isolated;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const Cell c{x, y};
      if (!map.is_obstacle(c)) continue;
      bool has_neighbor = false;
      for (const Cell n : {Cell{x, y - 1}, Cell{x, y + 1}, Cell{x + 1, y}, Cell{x - 1, y}})
        if (map.in_bounds(n) && map.is_obstacle(n)) has_neighbor = true;
      if (!has_neighbor) isolated.push_back(c);
    }
  }
  for (const auto& c : isolated) map.set_obstacle(c, false);
}

struct Layout {
  CellRect initial;
  std::vector<Cell> goals;
};

Layout draw_layout(const MapGenConfig& cfg, Rng& rng) {
  const int w = cfg.width;
  const int h = cfg.height;
  const int jx = std::max(1, w / 16);
  const int jy = std::max(1, h / 32);
  const int jg = std::max(1, static_cast<int>(std::lround(0.05 * h)));
  Layout layout;
  layout.initial = {w / 2 - kInitialSide / 2 + rng.uniform_int(-jx, jx),
                    h - kInitialSide - std::max(2, h / 8) + rng.uniform_int(-jy, jy), kInitialSide, kInitialSide};
  if (cfg.scenario_kind == ScenarioKind::kUnimodal) {
    const int ux = static_cast<int>(std::lround(0.22 * w));
    layout.goals.push_back({w / 2 + rng.uniform_int(-ux, ux),
                            static_cast<int>(std::lround(0.16 * h)) + rng.uniform_int(-jg, jg)});
  } else {
    const int gy = static_cast<int>(std::lround(0.19 * h));
    layout.goals.push_back({static_cast<int>(std::lround(0.22 * w)) + rng.uniform_int(-jg, jg), gy + rng.uniform_int(-jg, jg)});
    layout.goals.push_back({static_cast<int>(std::lround(0.78 * w)) + rng.uniform_int(-jg, jg), gy + rng.uniform_int(-jg, jg)});
  }
  return layout;
}

}  // namespace

Scenario generate_scenario(const MapGenConfig& config, std::uint64_t seed, GenerationStats* stats) {
  config.validate();
  if (config.width < 24 || config.height < 24)
    throw InfeasibleConfig("infeasible config: scenario layout needs at least a 24x24 map");

  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    Rng rng(hash64(seed, static_cast<std::uint64_t>(attempt)));
    GridMap map(config.width, config.height);

    const int n_rect = rng.uniform_int(config.n_obstacles.min, config.n_obstacles.max);
    for (int r = 0; r < n_rect; ++r) {
      const int rw = rng.uniform_int(config.obstacle_size.min, config.obstacle_size.max);
      const int rh = rng.uniform_int(config.obstacle_size.min, config.obstacle_size.max);
      const int rx = rng.uniform_int(0, std::max(0, config.width - rw));
      const int ry = rng.uniform_int(0, std::max(0, config.height - rh));
      fill_rect(map, rx, ry, rw, rh);
    }

    std::size_t flips = 0;
    std::size_t candidates = 0;
    for (std::size_t i = 0; i < map.cell_count(); ++i) {
      const Cell c = map.cell_at(i);
      if (map.is_obstacle(c)) continue;
      ++candidates;
      if (rng.bernoulli(config.noise_density)) {
        map.set_obstacle(c, true);
        ++flips;
      }
    }
    remove_isolated_obstacles(map);

    const Layout layout = draw_layout(config, rng);
    int ring_goal = -1;
    if (config.scenario_kind == ScenarioKind::kUnreachable) {
      ring_goal = rng.uniform_int(0, 1);
      const Cell g = layout.goals[static_cast<std::size_t>(ring_goal)];
      for (int dy = -kRingRadius; dy <= kRingRadius; ++dy)
        for (int dx = -kRingRadius; dx <= kRingRadius; ++dx)
          if (std::max(std::abs(dx), std::abs(dy)) == kRingRadius) map.set_obstacle({g.x + dx, g.y + dy}, true);
    }

    bool ok = true;
    for (const auto& c : layout.initial.cells()) ok = ok && map.is_free(c);
    for (const auto& g : layout.goals) ok = ok && region_free(map, g.x, g.y, kGoalClearance);
    if (!ok) continue;

    const auto initial_cells = layout.initial.cells();
    const auto reach = reachable_set(map, initial_cells);
    Scenario scenario{map, {}, layout.initial, seed};
    for (std::size_t gi = 0; gi < layout.goals.size(); ++gi) {
      const bool reachable = reach[map.index(layout.goals[gi])] != 0;
      const bool want = static_cast<int>(gi) != ring_goal;
      if (reachable != want) {
        ok = false;
        break;
      }
      scenario.goals.push_back({layout.goals[gi], reachable});
    }
    if (!ok) continue;

    if (stats) *stats = {attempt + 1, flips, candidates};
    return scenario;
  }
  throw InfeasibleConfig("infeasible config: no valid scenario after " + std::to_string(config.max_attempts) +
                         " attempts");
}

std::vector<std::uint8_t> reachable_set(const GridMap& map, std::span<const Cell> sources) {
  std::vector<std::uint8_t> seen(map.cell_count(), 0);
  std::deque<Cell> queue;
  for (const auto& s : sources) {
    if (!map.is_free(s))
      throw InvalidArgument("reachable_set: source (" + std::to_string(s.x) + "," + std::to_string(s.y) +
                            ") is not a free cell");
    if (!seen[map.index(s)]) {
      seen[map.index(s)] = 1;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (const Cell n : {Cell{c.x, c.y - 1}, Cell{c.x, c.y + 1}, Cell{c.x + 1, c.y}, Cell{c.x - 1, c.y}}) {
      if (map.is_free(n) && !seen[map.index(n)]) {
        seen[map.index(n)] = 1;
        queue.push_back(n);
      }
    }
  }
  return seen;
}

std::string save_map(const GridMap& map) {
  std::string out = "P5\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n255\n";
  out.reserve(out.size() + map.cell_count());
  for (const auto v : map.obstacle_mask()) out.push_back(static_cast<char>(v ? 0 : 255));
  return out;
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) throw ParseError(std::string("PGM ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("PGM header: expected ") + what, start);
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GridMap load_map(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw ParseError("not a binary PGM (magic P5)", 0);
  HeaderReader reader(bytes.substr(0));
  reader.advance();
  reader.advance();
  if (reader.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[reader.pos()])))
    throw ParseError("PGM header: expected whitespace after magic", reader.pos());
  const long width = reader.read_uint("width");
  const long height = reader.read_uint("height");
  const std::size_t maxval_pos = reader.pos();
  const long maxval = reader.read_uint("maxval");
  if (maxval != 255) throw ParseError("PGM maxval must be 255", maxval_pos);
  if (width < GridMap::kMinSide || height < GridMap::kMinSide)
    throw ParseError("PGM dimensions must be at least 4x4", maxval_pos);
  if (reader.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[reader.pos()])))
    throw ParseError("PGM header: expected single whitespace before raster", reader.pos());
  const std::size_t data = reader.pos() + 1;
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < data + n) throw ParseError("PGM raster truncated", bytes.size());
  if (bytes.size() > data + n) throw ParseError("PGM has trailing bytes beyond the raster", data + n);
  std::vector<std::uint8_t> mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = static_cast<unsigned char>(bytes[data + i]);
    if (v != 0 && v != 255) throw ParseError("PGM pixel value " + std::to_string(v) + " is neither 0 nor 255", data + i);
    mask[i] = v == 0 ? 1 : 0;
  }
  return GridMap(static_cast<int>(width), static_cast<int>(height), std::move(mask));
}

std::string save_scenario_json(const Scenario& scenario) {
  nlohmann::ordered_json j;
  j["seed"] = scenario.seed;
  j["goals"] = nlohmann::ordered_json::array();
  for (const auto& g : scenario.goals) j["goals"].push_back({{"x", g.cell.x}, {"y", g.cell.y}, {"reachable", g.reachable}});
  const auto& r = scenario.initial_region;
  j["initial_region"] = {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}};
  return j.dump(2) + "\n";
}

Scenario load_scenario_json(std::string_view text, GridMap map) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what(), e.byte);
  }
  try {
    Scenario s{std::move(map), {}, {}, j.at("seed").get<std::uint64_t>()};
    for (const auto& g : j.at("goals")) s.goals.push_back({{g.at("x").get<int>(), g.at("y").get<int>()}, g.at("reachable").get<bool>()});
    const auto& r = j.at("initial_region");
    s.initial_region = {r.at("x").get<int>(), r.at("y").get<int>(), r.at("w").get<int>(), r.at("h").get<int>()};
    for (const auto& c : s.initial_region.cells())
      if (!s.map.is_free(c)) throw InvalidArgument("scenario: initial region contains a non-free cell");
    for (const auto& g : s.goals)
      if (!s.map.is_free(g.cell)) throw InvalidArgument("scenario: goal on a non-free cell");
    if (s.initial_region.w <= 0 || s.initial_region.h <= 0) throw InvalidArgument("scenario: empty initial region");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("scenario JSON: ") + e.what());
  }
}

bool segment_free(const GridMap& map, const State& a, const State& b) {
  if (!map.state_is_free(a) || !map.state_is_free(b)) return false;
  const Vec2 d = b - a;
  // Walk the cell boundaries the segment crosses (cells are centred on integers). A crossing
  // exactly through a corner must have both side cells free.
  Cell c = cell_of(a);
  const int sx = d.x > 0 ? 1 : (d.x < 0 ? -1 : 0);
  const int sy = d.y > 0 ? 1 : (d.y < 0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  auto first_cross = [](double p, double dp, int s, int cell) {
    if (s == 0) return std::numeric_limits<double>::infinity();
    const double boundary = cell + 0.5 * s;
    return (boundary - p) / dp;
  };
  double tx = first_cross(a.x, d.x, sx, c.x);
  double ty = first_cross(a.y, d.y, sy, c.y);
  const double dtx = sx != 0 ? 1.0 / std::abs(d.x) : inf;
  const double dty = sy != 0 ? 1.0 / std::abs(d.y) : inf;
  while (std::min(tx, ty) <= 1.0) {
    if (std::abs(tx - ty) < 1e-12) {
      if (!map.is_free({c.x + sx, c.y}) || !map.is_free({c.x, c.y + sy})) return false;
      c = {c.x + sx, c.y + sy};
      tx += dtx;
      ty += dty;
    } else if (tx < ty) {
      c.x += sx;
      tx += dtx;
    } else {
      c.y += sy;
      ty += dty;
    }
    if (!map.is_free(c)) return false;
  }
  return true;
}

}  // namespace heatplan::grid
