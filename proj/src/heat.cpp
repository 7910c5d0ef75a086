#include "heatplan/heat.hpp"

#include <cmath>
#include <numeric>

namespace heatplan::heat {

void SolverParams::validate() const {
  if (!(coeff > 0.0 && coeff <= 0.25)) throw InvalidArgument("solver coeff must lie in (0, 1/4]");
  // Stability with alpha = 1 and dx = 1.
  if (!(dk > 0.0 && dk <= 0.25)) throw InvalidArgument("solver dk must lie in (0, 1/4]");
}

HeatField::HeatField(int width, int height)
    : HeatField(width, height, std::vector<double>(static_cast<std::size_t>(width) * height, 0.0)) {}

HeatField::HeatField(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width <= 0 || height <= 0) throw InvalidArgument("HeatField: non-positive dimensions");
  if (values_.size() != static_cast<std::size_t>(width) * height)
    throw InvalidArgument("HeatField: value count does not match dimensions");
}

HeatField HeatField::delta(int width, int height, const Cell& c, double mass) {
  HeatField f(width, height);
  if (c.x < 0 || c.y < 0 || c.x >= width || c.y >= height) throw InvalidArgument("HeatField::delta: cell out of bounds");
  f.at(c) = mass;
  return f;
}

double HeatField::total_mass() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

bool satisfies_invariants(const HeatField& field, const grid::GridMap& map) {
  if (field.width() != map.width() || field.height() != map.height()) return false;
  const auto v = field.values();
  const auto mask = map.obstacle_mask();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0)) return false;
    if (mask[i] && v[i] != 0.0) return false;
  }
  return true;
}

int steps_for_dispersion_time(double k, const SolverParams& params) {
  if (!(k >= 0.0) || !std::isfinite(k)) throw InvalidArgument("dispersion time must be finite and >= 0");
  if (!(params.dk > 0.0)) throw InvalidArgument("dk must be positive");
  return static_cast<int>(std::lround(k / params.dk));
}

void evolve_in_place(HeatField& field, const grid::GridMap& map, int n_steps, const SolverParams& params) {
  params.validate();
  if (field.width() != map.width() || field.height() != map.height())
    throw InvalidArgument("evolve: field " + std::to_string(field.width()) + "x" + std::to_string(field.height()) +
                          " does not match map " + std::to_string(map.width()) + "x" + std::to_string(map.height()));
  if (n_steps < 0) throw InvalidArgument("evolve: n_steps must be >= 0");
  if (n_steps == 0) return;
  if (!satisfies_invariants(field, map)) throw InvalidArgument("evolve: field is negative or holds mass on obstacles");

  // One-cell zero border so every interior cell has four readable neighbours.
  const int w = map.width();
  const int h = map.height();
  const int pw = w + 2;
  const std::size_t pn = static_cast<std::size_t>(pw) * (h + 2);
  std::vector<double> a(pn, 0.0), b(pn, 0.0), free(pn, 0.0), valid(pn, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y + 1) * pw + (x + 1);
      const bool f = map.is_free({x, y});
      free[p] = f ? 1.0 : 0.0;
      // Obstacles hold zero, so they drop out of the sum on their own.
      a[p] = f ? field.at({x, y}) : 0.0;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y + 1) * pw + (x + 1);
      if (free[p] == 0.0) continue;
      valid[p] = free[p - pw] + free[p + pw] + free[p + 1] + free[p - 1];
    }
  }

  const double c = params.coeff;
  const double* __restrict fm = free.data();
  const double* __restrict vm = valid.data();
  for (int step = 0; step < n_steps; ++step) {
    const double* __restrict u = a.data();
    double* __restrict out = b.data();
    for (int y = 1; y <= h; ++y) {
      const std::size_t row = static_cast<std::size_t>(y) * pw;
      for (std::size_t p = row + 1; p <= row + w; ++p) {
        const double nbr = ((u[p - pw] + u[p + pw]) + u[p + 1]) + u[p - 1];
        out[p] = fm[p] * (u[p] + c * (nbr - vm[p] * u[p]));
      }
    }
    a.swap(b);
  }

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) field.at({x, y}) = a[static_cast<std::size_t>(y + 1) * pw + (x + 1)];
}

HeatField evolve(const HeatField& field, const grid::GridMap& map, int n_steps, const SolverParams& params) {
  HeatField out = field;
  evolve_in_place(out, map, n_steps, params);
  return out;
}

}  // namespace heatplan::heat
