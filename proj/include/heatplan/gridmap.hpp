#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heatplan/common.hpp"

namespace heatplan::grid {

// Occupancy grid. Row-major, one byte per cell, 1 = obstacle.
class GridMap {
 public:
  static constexpr int kMinSide = 4;

  // All-free map.
  GridMap(int width, int height);
  GridMap(int width, int height, std::vector<std::uint8_t> obstacle_mask);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t cell_count() const { return obstacle_.size(); }
  std::size_t index(const Cell& c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  Cell cell_at(std::size_t i) const { return {static_cast<int>(i % width_), static_cast<int>(i / width_)}; }

  bool in_bounds(const Cell& c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  bool is_obstacle(const Cell& c) const { return obstacle_[index(c)] != 0; }
  // In bounds and not an obstacle.
  bool is_free(const Cell& c) const { return in_bounds(c) && obstacle_[index(c)] == 0; }
  // True when the state lies inside the domain [0, w-1] x [0, h-1] and its cell is free.
  bool state_is_free(const State& s) const;
  bool state_in_domain(const State& s) const {
    return s.x >= 0.0 && s.y >= 0.0 && s.x <= width_ - 1.0 && s.y <= height_ - 1.0;
  }

  void set_obstacle(const Cell& c, bool obstacle) { obstacle_[index(c)] = obstacle ? 1 : 0; }
  std::span<const std::uint8_t> obstacle_mask() const { return obstacle_; }
  std::size_t free_count() const;

  // Same dimensions, no obstacles.
  GridMap cleared() const { return GridMap(width_, height_); }

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> obstacle_;
};

struct Goal {
  Cell cell;
  bool reachable = true;

  friend bool operator==(const Goal&, const Goal&) = default;
};

// Axis-aligned block of cells [x, x+w) x [y, y+h).
struct CellRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool contains(const Cell& c) const { return c.x >= x && c.y >= y && c.x < x + w && c.y < y + h; }
  std::vector<Cell> cells() const;
  friend bool operator==(const CellRect&, const CellRect&) = default;
};

enum class ScenarioKind { kUnimodal, kMultimodal, kUnreachable };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);

struct Scenario {
  GridMap map;
  std::vector<Goal> goals;
  CellRect initial_region;
  std::uint64_t seed = 0;

  std::vector<Cell> goal_cells(bool reachable_only) const;
  // Uniform cell of the initial region plus uniform jitter inside the cell.
  State draw_initial_state(Rng& rng) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct IntRange {
  int min = 0;
  int max = 0;
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct MapGenConfig {
  int width = 64;
  int height = 64;
  IntRange n_obstacles{4, 8};
  IntRange obstacle_size{3, 10};
  double noise_density = 0.05;
  ScenarioKind scenario_kind = ScenarioKind::kUnimodal;
  int max_attempts = 1000;

  void validate() const;
  friend bool operator==(const MapGenConfig&, const MapGenConfig&) = default;
};

struct GenerationStats {
  int attempts = 0;
  // Noise pass of the accepted attempt: flips and the number of free cells it saw.
  std::size_t noise_flips = 0;
  std::size_t noise_candidates = 0;
};

Scenario generate_scenario(const MapGenConfig& config, std::uint64_t seed, GenerationStats* stats = nullptr);

// 4-connected free-cell closure of the sources. Returned as a per-cell mask.
std::vector<std::uint8_t> reachable_set(const GridMap& map, std::span<const Cell> sources);

// True when both endpoints are free and every cell the straight segment crosses is free.
// Passing exactly through a cell corner needs both side cells free.
bool segment_free(const GridMap& map, const State& a, const State& b);

// Binary PGM (P5, maxval 255): 0 = obstacle, 255 = free.
std::string save_map(const GridMap& map);
GridMap load_map(std::string_view bytes);

// Sidecar JSON {seed, goals:[{x,y,reachable}], initial_region:{x,y,w,h}}.
std::string save_scenario_json(const Scenario& scenario);
Scenario load_scenario_json(std::string_view json, GridMap map);

}  // namespace heatplan::grid
