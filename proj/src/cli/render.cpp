#include "heatplan/cli/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace heatplan::cli {

namespace {

using Rgb = std::array<unsigned char, 3>;

// White at zero through light blue to dark navy at the field maximum.
Rgb ramp(double v) {
  v = std::clamp(v, 0.0, 1.0);
  const auto lerp = [v](double a, double b) { return static_cast<unsigned char>(std::lround(a + (b - a) * v)); };
  return {lerp(255, 8), lerp(255, 48), lerp(255, 107)};
}

}  // namespace

std::string render_ppm(const grid::GridMap& map, std::span<const grid::Goal> goals, const std::vector<double>* field,
                       std::span<const sampler::Trajectory> trajectories) {
  const int w = map.width();
  const int h = map.height();
  if (field && field->size() != map.cell_count())
    throw InvalidArgument("render: field size " + std::to_string(field->size()) + " does not match the " +
                          std::to_string(w) + "x" + std::to_string(h) + " map");
  std::vector<Rgb> px(map.cell_count(), Rgb{255, 255, 255});

  if (field) {
    double mx = 0.0;
    for (std::size_t i = 0; i < px.size(); ++i)
      if (!map.obstacle_mask()[i] && std::isfinite((*field)[i])) mx = std::max(mx, (*field)[i]);
    if (mx > 0.0)
      for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = ramp(std::isfinite((*field)[i]) ? std::sqrt(std::max(0.0, (*field)[i]) / mx) : 0.0);
  }
  for (std::size_t i = 0; i < px.size(); ++i)
    if (map.obstacle_mask()[i]) px[i] = {0, 0, 0};

  for (const auto& t : trajectories) {
    for (const auto& s : t.states) {
      const Cell c = cell_of(s);
      if (!map.in_bounds(c)) throw InvalidArgument("render: trajectory state outside the map");
      px[map.index(c)] = {255, 0, 0};
    }
  }
  for (const auto& g : goals) {
    if (!map.in_bounds(g.cell)) throw InvalidArgument("render: goal outside the map");
    for (const Cell d : {Cell{0, 0}, Cell{1, 0}, Cell{-1, 0}, Cell{0, 1}, Cell{0, -1}}) {
      const Cell c{g.cell.x + d.x, g.cell.y + d.y};
      if (map.in_bounds(c)) px[map.index(c)] = {0, 255, 0};
    }
  }

  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + 3 * px.size());
  for (const auto& p : px) out.append(reinterpret_cast<const char*>(p.data()), 3);
  return out;
}

}  // namespace heatplan::cli
