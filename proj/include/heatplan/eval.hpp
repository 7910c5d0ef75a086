#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "heatplan/baselines/bc.hpp"
#include "heatplan/baselines/gaussian.hpp"
#include "heatplan/gridmap.hpp"
#include "heatplan/kernel.hpp"
#include "heatplan/sampler.hpp"

namespace heatplan::eval {

struct EvalConfig {
  int n_episodes = 100;
  int n_samples = 100;
  double success_radius = 3.0;
  double kl_smoothing = 1e-9;
  std::uint64_t base_seed = 0;

  void validate() const;
};

// Percentage of states within r of a reachable goal center.
double success_rate(std::span<const State> finals, const grid::Scenario& scenario, double r);

// KL(p_goal || smoothed histogram of finals), nats. Finals are binned to the nearest cell.
double kl_divergence(std::span<const State> finals, const kernel::ProbabilityField& p_goal, const grid::GridMap& map,
                     double delta);

// A model bound to one scenario.
class EpisodePlanner {
 public:
  virtual ~EpisodePlanner() = default;
  virtual sampler::Trajectory sample(const State& x_init, std::uint64_t seed) const = 0;
};

class PlannerModel {
 public:
  virtual ~PlannerModel() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<EpisodePlanner> prepare(const grid::Scenario& scenario) const = 0;
};

struct ModelSettings {
  kernel::KernelSchedule schedule;
  kernel::KernelParams kernel;
  sampler::SamplerConfig sampler;
  // Only reaching the sampled goal matters for the metrics, so refinement is off by default here.
  baselines::RRTStarConfig rrt = [] {
    baselines::RRTStarConfig c;
    c.stop_at_first_solution = true;
    return c;
  }();
  // 0 means T * inner_iters.
  int bc_steps = 0;
};

std::unique_ptr<PlannerModel> make_ours(const ModelSettings& settings);
std::unique_ptr<PlannerModel> make_gaussian(const ModelSettings& settings);
std::unique_ptr<PlannerModel> make_gaussian_rrt(const ModelSettings& settings);
std::unique_ptr<PlannerModel> make_bc(const ModelSettings& settings);
// Names: ours, gaussian, gaussian_rrt, bc.
std::unique_ptr<PlannerModel> make_model(const std::string& name, const ModelSettings& settings);
std::vector<std::string> model_names();

struct Row {
  std::string model;
  std::string scenario;
  double success_rate = 0.0;
  double kl_divergence = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t frozen = 0;
  std::uint64_t near_unreachable = 0;
  std::uint64_t proposals = 0;
  std::uint64_t rejections = 0;
  std::uint64_t states_checked = 0;
  std::uint64_t states_in_collision = 0;
  int failed_episodes = 0;
  // Successful samples by the nearest reachable goal, goals in scenario order.
  std::vector<std::uint64_t> success_by_goal;
};

struct MetricsTable {
  std::vector<Row> rows;
  const Row& find(const std::string& model, const std::string& scenario) const;
  std::string to_csv() const;
};

struct BenchmarkRequest {
  grid::MapGenConfig map;
  EvalConfig eval;
  // Used for the ground-truth goal distribution.
  kernel::KernelParams kernel;
  std::vector<grid::ScenarioKind> kinds{grid::ScenarioKind::kUnimodal, grid::ScenarioKind::kMultimodal,
                                        grid::ScenarioKind::kUnreachable};
  int threads = 1;
};

MetricsTable run_benchmark(const std::vector<const PlannerModel*>& models, const BenchmarkRequest& request);

// x_init and trajectory seed of one sample.
std::uint64_t sample_seed(std::uint64_t base_seed, std::uint64_t episode, std::uint64_t sample);
State initial_state(const grid::Scenario& scenario, std::uint64_t sample_seed);

}  // namespace heatplan::eval
