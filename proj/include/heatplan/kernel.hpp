#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "heatplan/gridmap.hpp"
#include "heatplan/heat.hpp"

namespace heatplan::kernel {

// Geometric dispersion-time schedule k(t), t = 1..T.
struct KernelSchedule {
  int T = 10;
  double k_min = 12.5;
  double k_max = 3612.5;

  void validate() const;
  double k(int t) const;
  void check_level(int t) const;
};

enum class FieldRole { kP0, kP0t, kPt, kPgoal };
std::string to_string(FieldRole role);

// Normalized field with zero mass on obstacles.
class ProbabilityField {
 public:
  ProbabilityField(int width, int height, std::vector<double> values, FieldRole role);

  int width() const { return width_; }
  int height() const { return height_; }
  FieldRole role() const { return role_; }
  std::span<const double> values() const { return values_; }
  double at(const Cell& c) const { return values_[static_cast<std::size_t>(c.y) * width_ + c.x]; }
  double sum() const;
  ProbabilityField with_role(FieldRole role) const { return {width_, height_, values_, role}; }
  heat::HeatField as_heat() const { return {width_, height_, values_}; }

 private:
  int width_;
  int height_;
  std::vector<double> values_;
  FieldRole role_;
};

struct KernelParams {
  // Dispersion time of the goal distribution.
  double h = 2.0;
  double smooth_sigma = 1.0;
  heat::SolverParams solver;

  void validate() const;
};

// Separable Gaussian blur, truncated at ceil(4 sigma), zero outside the grid.
std::vector<double> gaussian_blur(std::span<const double> values, int width, int height, double sigma);

// Blur within each 4-connected free component, zero obstacles, normalize.
ProbabilityField finalize(const heat::HeatField& raw, const grid::GridMap& map, const KernelParams& params,
                          FieldRole role = FieldRole::kPt);

enum class GoalSubset { kAll, kReachableOnly };

heat::HeatField goal_seed(const grid::Scenario& scenario, GoalSubset subset);
ProbabilityField goal_distribution(const grid::Scenario& scenario, const KernelParams& params, GoalSubset subset);

// evolve(p0, n(k(t))) before finalize.
heat::HeatField perturbed_raw(const ProbabilityField& p0, int t, const KernelSchedule& schedule,
                              const grid::GridMap& map, const KernelParams& params);
ProbabilityField perturbed_distribution(const ProbabilityField& p0, int t, const KernelSchedule& schedule,
                                        const grid::GridMap& map, const KernelParams& params);
// All levels 1..T, evolved incrementally. Index t-1 holds level t.
std::vector<ProbabilityField> perturbed_stack(const ProbabilityField& p0, const KernelSchedule& schedule,
                                              const grid::GridMap& map, const KernelParams& params);

ProbabilityField kernel_from_source(const Cell& x0, int t, const KernelSchedule& schedule, const grid::GridMap& map,
                                    const KernelParams& params);
std::vector<ProbabilityField> kernel_stack_from_source(const Cell& x0, const KernelSchedule& schedule,
                                                       const grid::GridMap& map, const KernelParams& params);

// Per-source kernel stacks, built at most once per source. Concurrent readers, one writer at a time.
class KernelCache {
 public:
  KernelCache(grid::GridMap map, KernelSchedule schedule, KernelParams params);

  std::shared_ptr<const std::vector<ProbabilityField>> stack(const Cell& x0);
  const ProbabilityField& get(const Cell& x0, int t);
  std::size_t builds() const;
  const grid::GridMap& map() const { return map_; }
  const KernelSchedule& schedule() const { return schedule_; }

 private:
  grid::GridMap map_;
  KernelSchedule schedule_;
  KernelParams params_;
  mutable std::shared_mutex mutex_;
  std::map<Cell, std::shared_ptr<const std::vector<ProbabilityField>>> stacks_;
  std::size_t builds_ = 0;
};

}  // namespace heatplan::kernel
