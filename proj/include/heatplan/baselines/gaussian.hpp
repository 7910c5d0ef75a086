#pragma once

#include <cstdint>

#include "heatplan/baselines/rrt_star.hpp"
#include "heatplan/kernel.hpp"
#include "heatplan/sampler.hpp"

namespace heatplan::baselines {

// Annealed Langevin with the obstacle-blind Gaussian mixture score over every goal. A proposal
// in an obstacle freezes the sample; proposals past the map edge are clamped to it.
sampler::Trajectory gaussian_diffusion_sample(const grid::Scenario& scenario, const kernel::KernelSchedule& schedule,
                                              const sampler::SamplerConfig& config, const State& x_init,
                                              std::uint64_t seed);

// Goal sampled by the Gaussian sampler on an obstacle-free copy of the map, then RRT* to it on the
// real map. Planner failure returns a frozen trajectory at x_init.
sampler::Trajectory gaussian_plus_rrt(const grid::Scenario& scenario, const kernel::KernelSchedule& schedule,
                                      const sampler::SamplerConfig& config, const RRTStarConfig& rrt,
                                      const State& x_init, std::uint64_t seed);

}  // namespace heatplan::baselines
