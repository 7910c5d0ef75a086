#pragma once

#include <string>
#include <vector>

#include "heatplan/eval.hpp"
#include "heatplan/gridmap.hpp"
#include "heatplan/kernel.hpp"
#include "heatplan/sampler.hpp"
#include "heatplan/scorematch.hpp"
#include "json.hpp"

namespace heatplan::cli {

struct RunConfig {
  grid::MapGenConfig map;
  kernel::KernelSchedule schedule;
  kernel::KernelParams kernel;
  sampler::SamplerConfig sampler;
  int n_trajectories = 100;
  scorematch::TrainConfig train;
  eval::EvalConfig eval;
  std::vector<std::string> models = eval::model_names();
  std::vector<grid::ScenarioKind> scenario_kinds{grid::ScenarioKind::kUnimodal, grid::ScenarioKind::kMultimodal,
                                                 grid::ScenarioKind::kUnreachable};
  int bc_steps = 0;
  baselines::RRTStarConfig rrt = eval::ModelSettings{}.rrt;

  eval::ModelSettings model_settings() const;
};

// Thrown for unknown keys, type mismatches and malformed overrides.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

nlohmann::ordered_json default_config_json();
// Defaults, then the file (if any), then "a.b=value" overrides. Unknown keys are rejected.
nlohmann::ordered_json effective_config(const std::string& file_text, const std::vector<std::string>& overrides);
RunConfig config_from_json(const nlohmann::ordered_json& j);

}  // namespace heatplan::cli
