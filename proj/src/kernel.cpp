#include "heatplan/kernel.hpp"

#include <cmath>
#include <numeric>

namespace heatplan::kernel {

void KernelSchedule::validate() const {
  if (T < 2) throw InvalidArgument("schedule T must be >= 2");
  if (!(k_min > 0.0 && k_max > k_min)) throw InvalidArgument("schedule needs 0 < k_min < k_max");
}

double KernelSchedule::k(int t) const {
  check_level(t);
  if (t == 1) return k_min;
  if (t == T) return k_max;
  return k_min * std::pow(k_max / k_min, static_cast<double>(t - 1) / (T - 1));
}

void KernelSchedule::check_level(int t) const {
  if (t < 1 || t > T) throw InvalidArgument("level t=" + std::to_string(t) + " outside 1.." + std::to_string(T));
}

std::string to_string(FieldRole role) {
  switch (role) {
    case FieldRole::kP0: return "p0";
    case FieldRole::kP0t: return "p0t";
    case FieldRole::kPt: return "pt";
    case FieldRole::kPgoal: return "pgoal";
  }
  return "unknown";
}

ProbabilityField::ProbabilityField(int width, int height, std::vector<double> values, FieldRole role)
    : width_(width), height_(height), values_(std::move(values)), role_(role) {
  if (values_.size() != static_cast<std::size_t>(width) * height)
    throw InvalidArgument("ProbabilityField: value count does not match dimensions");
}

double ProbabilityField::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

void KernelParams::validate() const {
  if (!(h > 0.0)) throw InvalidArgument("kernel h must be > 0");
  if (!(smooth_sigma >= 0.0)) throw InvalidArgument("kernel smooth_sigma must be >= 0");
  solver.validate();
}

std::vector<double> gaussian_blur(std::span<const double> values, int width, int height, double sigma) {
  std::vector<double> out(values.begin(), values.end());
  if (sigma <= 0.0) return out;
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  for (int j = -radius; j <= radius; ++j) taps[j + radius] = std::exp(-0.5 * j * j / (sigma * sigma));
  const double norm = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (auto& t : taps) t /= norm;

  std::vector<double> tmp(out.size(), 0.0);
  for (int y = 0; y < height; ++y) {
    const double* row = out.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int j = std::max(-radius, -x); j <= std::min(radius, width - 1 - x); ++j) acc += taps[j + radius] * row[x + j];
      tmp[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int j = std::max(-radius, -y); j <= std::min(radius, height - 1 - y); ++j)
        acc += taps[j + radius] * tmp[static_cast<std::size_t>(y + j) * width + x];
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  return out;
}

namespace {

// 4-connected labels of free cells, -1 on obstacles.
std::vector<int> component_labels(const grid::GridMap& map, int& count) {
  const int w = map.width(), h = map.height();
  const auto mask = map.obstacle_mask();
  std::vector<int> label(mask.size(), -1);
  std::vector<std::size_t> stack;
  count = 0;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (mask[start] || label[start] >= 0) continue;
    label[start] = count;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
      const std::size_t nb[4] = {i - w, i + w, i - 1, i + 1};
      const bool ok[4] = {y > 0, y < h - 1, x > 0, x < w - 1};
      for (int k = 0; k < 4; ++k)
        if (ok[k] && !mask[nb[k]] && label[nb[k]] < 0) {
          label[nb[k]] = count;
          stack.push_back(nb[k]);
        }
    }
    ++count;
  }
  return label;
}

}  // namespace

// The blur runs separately on each connected free component so that smoothing never
// carries mass through a wall into a region heat could not reach.
ProbabilityField finalize(const heat::HeatField& raw, const grid::GridMap& map, const KernelParams& params,
                          FieldRole role) {
  params.validate();
  if (raw.width() != map.width() || raw.height() != map.height())
    throw InvalidArgument("finalize: field does not match map dimensions");
  for (double x : raw.values())
    if (x < 0.0) throw InvalidArgument("finalize: negative value in raw field");

  int n_components = 0;
  const auto label = component_labels(map, n_components);
  std::vector<double> mass(static_cast<std::size_t>(n_components), 0.0);
  for (std::size_t i = 0; i < label.size(); ++i)
    if (label[i] >= 0) mass[static_cast<std::size_t>(label[i])] += raw.values()[i];

  std::vector<double> v(raw.size(), 0.0);
  std::vector<double> part(raw.size());
  for (int c = 0; c < n_components; ++c) {
    if (mass[static_cast<std::size_t>(c)] <= 0.0) continue;
    for (std::size_t i = 0; i < part.size(); ++i) part[i] = label[i] == c ? raw.values()[i] : 0.0;
    const auto blurred = gaussian_blur(part, raw.width(), raw.height(), params.smooth_sigma);
    double kept = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (label[i] == c) kept += blurred[i];
    // Each component keeps the mass heat gave it.
    const double scale = mass[static_cast<std::size_t>(c)] / kept;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (label[i] == c) v[i] = blurred[i] * scale;
  }
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) throw InvalidArgument("finalize: zero total mass after masking");
  for (auto& x : v) x /= total;
  return {raw.width(), raw.height(), std::move(v), role};
}

heat::HeatField goal_seed(const grid::Scenario& scenario, GoalSubset subset) {
  const auto goals = scenario.goal_cells(subset == GoalSubset::kReachableOnly);
  if (goals.empty()) throw InvalidArgument("goal_distribution: selected goal set is empty");
  heat::HeatField u(scenario.map.width(), scenario.map.height());
  for (const auto& g : goals) {
    if (!scenario.map.is_free(g)) throw InvalidArgument("goal_distribution: goal on an obstacle");
    u.at(g) += 1.0 / static_cast<double>(goals.size());
  }
  return u;
}

ProbabilityField goal_distribution(const grid::Scenario& scenario, const KernelParams& params, GoalSubset subset) {
  params.validate();
  auto u = goal_seed(scenario, subset);
  heat::evolve_in_place(u, scenario.map, heat::steps_for_dispersion_time(params.h, params.solver), params.solver);
  return finalize(u, scenario.map, params, subset == GoalSubset::kAll ? FieldRole::kP0 : FieldRole::kPgoal);
}

heat::HeatField perturbed_raw(const ProbabilityField& p0, int t, const KernelSchedule& schedule,
                              const grid::GridMap& map, const KernelParams& params) {
  schedule.validate();
  schedule.check_level(t);
  auto u = p0.as_heat();
  heat::evolve_in_place(u, map, heat::steps_for_dispersion_time(schedule.k(t), params.solver), params.solver);
  return u;
}

ProbabilityField perturbed_distribution(const ProbabilityField& p0, int t, const KernelSchedule& schedule,
                                        const grid::GridMap& map, const KernelParams& params) {
  return finalize(perturbed_raw(p0, t, schedule, map, params), map, params, FieldRole::kPt);
}

namespace {

std::vector<ProbabilityField> evolve_stack(heat::HeatField u, const KernelSchedule& schedule,
                                           const grid::GridMap& map, const KernelParams& params, FieldRole role) {
  schedule.validate();
  params.validate();
  std::vector<ProbabilityField> out;
  out.reserve(static_cast<std::size_t>(schedule.T));
  int done = 0;
  for (int t = 1; t <= schedule.T; ++t) {
    const int n = heat::steps_for_dispersion_time(schedule.k(t), params.solver);
    heat::evolve_in_place(u, map, n - done, params.solver);
    done = n;
    out.push_back(finalize(u, map, params, role));
  }
  return out;
}

}  // namespace

std::vector<ProbabilityField> perturbed_stack(const ProbabilityField& p0, const KernelSchedule& schedule,
                                              const grid::GridMap& map, const KernelParams& params) {
  return evolve_stack(p0.as_heat(), schedule, map, params, FieldRole::kPt);
}

ProbabilityField kernel_from_source(const Cell& x0, int t, const KernelSchedule& schedule, const grid::GridMap& map,
                                    const KernelParams& params) {
  schedule.validate();
  schedule.check_level(t);
  if (!map.is_free(x0)) throw InvalidArgument("kernel_from_source: source cell is not free");
  auto u = heat::HeatField::delta(map.width(), map.height(), x0);
  heat::evolve_in_place(u, map, heat::steps_for_dispersion_time(schedule.k(t), params.solver), params.solver);
  return finalize(u, map, params, FieldRole::kP0t);
}

std::vector<ProbabilityField> kernel_stack_from_source(const Cell& x0, const KernelSchedule& schedule,
                                                       const grid::GridMap& map, const KernelParams& params) {
  if (!map.is_free(x0)) throw InvalidArgument("kernel_from_source: source cell is not free");
  return evolve_stack(heat::HeatField::delta(map.width(), map.height(), x0), schedule, map, params, FieldRole::kP0t);
}

KernelCache::KernelCache(grid::GridMap map, KernelSchedule schedule, KernelParams params)
    : map_(std::move(map)), schedule_(schedule), params_(params) {
  schedule_.validate();
  params_.validate();
}

std::shared_ptr<const std::vector<ProbabilityField>> KernelCache::stack(const Cell& x0) {
  {
    std::shared_lock lock(mutex_);
    auto it = stacks_.find(x0);
    if (it != stacks_.end()) return it->second;
  }
  std::unique_lock lock(mutex_);
  auto it = stacks_.find(x0);
  if (it != stacks_.end()) return it->second;
  auto built = std::make_shared<const std::vector<ProbabilityField>>(kernel_stack_from_source(x0, schedule_, map_, params_));
  stacks_.emplace(x0, built);
  ++builds_;
  return built;
}

const ProbabilityField& KernelCache::get(const Cell& x0, int t) {
  schedule_.check_level(t);
  return (*stack(x0))[static_cast<std::size_t>(t - 1)];
}

std::size_t KernelCache::builds() const {
  std::shared_lock lock(mutex_);
  return builds_;
}

}  // namespace heatplan::kernel
