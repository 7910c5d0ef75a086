#include "heatplan/baselines/gaussian.hpp"

namespace heatplan::baselines {

sampler::Trajectory gaussian_diffusion_sample(const grid::Scenario& scenario, const kernel::KernelSchedule& schedule,
                                              const sampler::SamplerConfig& config, const State& x_init,
                                              std::uint64_t seed) {
  const auto provider = sampler::gaussian_provider(scenario, schedule);
  return sampler::sample_trajectory(scenario, *provider, x_init, schedule, config, seed,
                                    sampler::CollisionPolicy{false, true});
}

sampler::Trajectory gaussian_plus_rrt(const grid::Scenario& scenario, const kernel::KernelSchedule& schedule,
                                      const sampler::SamplerConfig& config, const RRTStarConfig& rrt,
                                      const State& x_init, std::uint64_t seed) {
  grid::Scenario open = scenario;
  open.map = scenario.map.cleared();
  const auto goal_run = gaussian_diffusion_sample(open, schedule, config, x_init, seed);
  const State x0 = goal_run.final_state();

  sampler::Trajectory out;
  out.seed = seed;
  RRTStarConfig planner = rrt;
  planner.seed = hash64(seed, rrt.seed);
  // Segments are checked cell by cell without corner cutting, so RRT* can only connect cells
  // that are 4-connected. Skip the search when the goal is known to be cut off.
  bool connected = scenario.map.state_is_free(x0);
  if (connected) {
    const Cell from = cell_of(x_init);
    connected = grid::reachable_set(scenario.map, std::span<const Cell>(&from, 1))[scenario.map.index(cell_of(x0))] != 0;
  }
  if (connected) {
    const auto plan = rrt_star(scenario.map, x_init, x0, planner);
    if (plan.success) {
      out.states = plan.path;
      return out;
    }
  }
  out.states = {x_init};
  out.frozen = true;
  return out;
}

}  // namespace heatplan::baselines
