#include "heatplan/cli/config.hpp"

namespace heatplan::cli {

using nlohmann::ordered_json;

eval::ModelSettings RunConfig::model_settings() const {
  eval::ModelSettings s;
  s.schedule = schedule;
  s.kernel = kernel;
  s.sampler = sampler;
  s.rrt = rrt;
  s.bc_steps = bc_steps;
  return s;
}

ordered_json default_config_json() {
  const RunConfig d;
  ordered_json j;
  j["map"] = {{"width", d.map.width},
              {"height", d.map.height},
              {"n_obstacles", {d.map.n_obstacles.min, d.map.n_obstacles.max}},
              {"obstacle_size", {d.map.obstacle_size.min, d.map.obstacle_size.max}},
              {"noise_density", d.map.noise_density},
              {"scenario_kind", grid::to_string(d.map.scenario_kind)},
              {"max_attempts", d.map.max_attempts}};
  j["kernel"] = {{"T", d.schedule.T},
                 {"k_min", d.schedule.k_min},
                 {"k_max", d.schedule.k_max},
                 {"h", d.kernel.h},
                 {"smooth_sigma", d.kernel.smooth_sigma},
                 {"coeff", d.kernel.solver.coeff},
                 {"dk", d.kernel.solver.dk}};
  j["sampler"] = {{"epsilon", d.sampler.epsilon},
                  {"inner_iters", d.sampler.inner_iters},
                  {"mode", sampler::to_string(d.sampler.mode)},
                  {"k1", d.sampler.k1},
                  {"k2", d.sampler.k2},
                  {"max_reject", d.sampler.max_reject},
                  {"domain_scale", d.sampler.domain_scale},
                  {"max_drift", d.sampler.max_drift},
                  {"n_trajectories", d.n_trajectories}};
  j["train"] = {{"learning_rate", d.train.learning_rate},
                {"batch_size", d.train.batch_size},
                {"n_iterations", d.train.n_iterations},
                {"support_threshold", d.train.support_threshold}};
  ordered_json kinds = ordered_json::array();
  for (auto k : d.scenario_kinds) kinds.push_back(grid::to_string(k));
  j["eval"] = {{"n_episodes", d.eval.n_episodes},
               {"n_samples", d.eval.n_samples},
               {"success_radius", d.eval.success_radius},
               {"kl_smoothing", d.eval.kl_smoothing},
               {"models", d.models},
               {"scenario_kinds", kinds},
               {"bc_steps", d.bc_steps}};
  j["rrt"] = {{"max_iterations", d.rrt.max_iterations},
              {"step_size", d.rrt.step_size},
              {"neighborhood_radius", d.rrt.neighborhood_radius},
              {"goal_bias", d.rrt.goal_bias},
              {"stop_at_first_solution", d.rrt.stop_at_first_solution}};
  return j;
}

namespace {

bool same_kind(const ordered_json& def, const ordered_json& v) {
  if (def.is_number_float()) return v.is_number();
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array();
  if (def.is_object()) return v.is_object();
  return false;
}

void assign(ordered_json& target, const ordered_json& value, const std::string& path) {
  if (!same_kind(target, value))
    throw ConfigError("config key '" + path + "' expects " + std::string(target.type_name()) + ", got " +
                      value.type_name());
  if (target.is_number_float()) {
    target = value.get<double>();
  } else if (target.is_object()) {
    for (auto it = value.begin(); it != value.end(); ++it) {
      const std::string sub = path.empty() ? it.key() : path + "." + it.key();
      if (!target.contains(it.key())) throw ConfigError("unknown config key '" + sub + "'");
      assign(target[it.key()], it.value(), sub);
    }
  } else {
    target = value;
  }
}

}  // namespace

ordered_json effective_config(const std::string& file_text, const std::vector<std::string>& overrides) {
  ordered_json cfg = default_config_json();
  if (!file_text.empty()) {
    ordered_json file;
    try {
      file = ordered_json::parse(file_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
    assign(cfg, file, "");
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + ov + "' is not of the form key=value");
    const std::string key = ov.substr(0, eq);
    const std::string text = ov.substr(eq + 1);
    ordered_json* node = &cfg;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown config key '" + key + "'");
      node = &(*node)[part];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    ordered_json value;
    try {
      value = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
      value = text;
    }
    if (node->is_string() && !value.is_string()) value = text;
    assign(*node, value, key);
  }
  return cfg;
}

namespace {

grid::IntRange range_of(const ordered_json& v, const char* name) {
  if (v.size() != 2) throw ConfigError(std::string("config key '") + name + "' must be [min, max]");
  return {v[0].get<int>(), v[1].get<int>()};
}

}  // namespace

RunConfig config_from_json(const ordered_json& j) {
  RunConfig c;
  try {
    const auto& m = j.at("map");
    c.map.width = m.at("width").get<int>();
    c.map.height = m.at("height").get<int>();
    c.map.n_obstacles = range_of(m.at("n_obstacles"), "map.n_obstacles");
    c.map.obstacle_size = range_of(m.at("obstacle_size"), "map.obstacle_size");
    c.map.noise_density = m.at("noise_density").get<double>();
    c.map.scenario_kind = grid::scenario_kind_from_string(m.at("scenario_kind").get<std::string>());
    c.map.max_attempts = m.at("max_attempts").get<int>();

    const auto& k = j.at("kernel");
    c.schedule.T = k.at("T").get<int>();
    c.schedule.k_min = k.at("k_min").get<double>();
    c.schedule.k_max = k.at("k_max").get<double>();
    c.kernel.h = k.at("h").get<double>();
    c.kernel.smooth_sigma = k.at("smooth_sigma").get<double>();
    c.kernel.solver.coeff = k.at("coeff").get<double>();
    c.kernel.solver.dk = k.at("dk").get<double>();

    const auto& s = j.at("sampler");
    c.sampler.epsilon = s.at("epsilon").get<double>();
    c.sampler.inner_iters = s.at("inner_iters").get<int>();
    c.sampler.mode = sampler::mode_from_string(s.at("mode").get<std::string>());
    c.sampler.k1 = s.at("k1").get<double>();
    c.sampler.k2 = s.at("k2").get<double>();
    c.sampler.max_reject = s.at("max_reject").get<int>();
    c.sampler.domain_scale = s.at("domain_scale").get<double>();
    c.sampler.max_drift = s.at("max_drift").get<double>();
    c.n_trajectories = s.at("n_trajectories").get<int>();

    const auto& t = j.at("train");
    c.train.learning_rate = t.at("learning_rate").get<double>();
    c.train.batch_size = t.at("batch_size").get<int>();
    c.train.n_iterations = t.at("n_iterations").get<int>();
    c.train.support_threshold = t.at("support_threshold").get<double>();

    const auto& e = j.at("eval");
    c.eval.n_episodes = e.at("n_episodes").get<int>();
    c.eval.n_samples = e.at("n_samples").get<int>();
    c.eval.success_radius = e.at("success_radius").get<double>();
    c.eval.kl_smoothing = e.at("kl_smoothing").get<double>();
    c.models = e.at("models").get<std::vector<std::string>>();
    c.scenario_kinds.clear();
    for (const auto& name : e.at("scenario_kinds")) c.scenario_kinds.push_back(grid::scenario_kind_from_string(name.get<std::string>()));
    c.bc_steps = e.at("bc_steps").get<int>();

    const auto& r = j.at("rrt");
    c.rrt.max_iterations = r.at("max_iterations").get<int>();
    c.rrt.step_size = r.at("step_size").get<double>();
    c.rrt.neighborhood_radius = r.at("neighborhood_radius").get<double>();
    c.rrt.goal_bias = r.at("goal_bias").get<double>();
    c.rrt.stop_at_first_solution = r.at("stop_at_first_solution").get<bool>();
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("bad config value: ") + ex.what());
  } catch (const InvalidArgument& ex) {
    throw ConfigError(ex.what());
  }

  try {
    c.map.validate();
    c.schedule.validate();
    c.kernel.validate();
    c.sampler.validate();
    c.train.validate();
    c.eval.validate();
    c.rrt.validate();
    if (c.n_trajectories < 1) throw InvalidArgument("sampler.n_trajectories must be >= 1");
    if (c.bc_steps < 0) throw InvalidArgument("eval.bc_steps must be >= 0");
    for (const auto& m : c.models) eval::make_model(m, c.model_settings());
  } catch (const InvalidArgument& ex) {
    throw ConfigError(ex.what());
  }
  return c;
}

}  // namespace heatplan::cli
