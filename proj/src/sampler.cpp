#include "heatplan/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace heatplan::sampler {

std::string to_string(Mode mode) { return mode == Mode::kStandard ? "standard" : "modified"; }

Mode mode_from_string(const std::string& name) {
  if (name == "standard") return Mode::kStandard;
  if (name == "modified") return Mode::kModified;
  throw InvalidArgument("unknown sampler mode '" + name + "'");
}

void SamplerConfig::validate() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("sampler epsilon must be > 0");
  if (inner_iters < 1) throw InvalidArgument("sampler inner_iters must be >= 1");
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw InvalidArgument("sampler k1 and k2 must be > 0");
  if (max_reject < 1) throw InvalidArgument("sampler max_reject must be >= 1");
  if (!(domain_scale >= 0.0)) throw InvalidArgument("sampler domain_scale must be >= 0");
  if (!(max_drift >= 0.0)) throw InvalidArgument("sampler max_drift must be >= 0");
}

double noise_sigma(int t, const kernel::KernelSchedule& schedule, int width) {
  return std::min(std::sqrt(2.0 * schedule.k(t)), width / 2.0);
}

double lambda(int t, const kernel::KernelSchedule& schedule, int width) {
  const double f = noise_sigma(t, schedule, width);
  return f * f;
}

double alpha(int t, const kernel::KernelSchedule& schedule, const SamplerConfig& config, int width) {
  schedule.check_level(t);
  if (t == schedule.T) return config.epsilon;
  return config.epsilon * lambda(t, schedule, width) / lambda(schedule.T, schedule, width);
}

StepScales step_scales(double alpha_t, Mode mode, double k1, double k2) {
  if (mode == Mode::kStandard) return {alpha_t / 2.0, std::sqrt(alpha_t)};
  return {std::pow(alpha_t, k1) / 2.0, std::pow(alpha_t, (k1 + k2) / 2.0)};
}

State langevin_step(const State& s, const Vec2& score, double alpha_t, const Vec2& noise, Mode mode, double k1,
                    double k2) {
  const auto c = step_scales(alpha_t, mode, k1, k2);
  return {s.x + c.drift * score.x + c.noise * noise.x, s.y + c.drift * score.y + c.noise * noise.y};
}

FieldStackProvider::FieldStackProvider(std::vector<score::ScoreField> fields) : fields_(std::move(fields)) {
  if (fields_.empty()) throw InvalidArgument("FieldStackProvider: no levels");
}

Vec2 FieldStackProvider::score(const State& s, int t) const {
  if (t < 1 || t > levels()) throw InvalidArgument("score provider: level out of range");
  return score::score_at(fields_[static_cast<std::size_t>(t - 1)], s);
}

GaussianMixtureProvider::GaussianMixtureProvider(std::vector<State> means, std::vector<double> weights,
                                                 std::vector<double> sigmas)
    : means_(std::move(means)), weights_(std::move(weights)), sigmas_(std::move(sigmas)) {
  if (means_.empty() || means_.size() != weights_.size()) throw InvalidArgument("GaussianMixtureProvider: bad mixture");
  if (sigmas_.empty()) throw InvalidArgument("GaussianMixtureProvider: no levels");
}

Vec2 GaussianMixtureProvider::score(const State& s, int t) const {
  if (t < 1 || t > levels()) throw InvalidArgument("score provider: level out of range");
  return score::analytic_gaussian_score(s, means_, sigmas_[static_cast<std::size_t>(t - 1)], weights_);
}

std::shared_ptr<FieldStackProvider> exact_provider(const grid::Scenario& scenario,
                                                   const kernel::KernelSchedule& schedule,
                                                   const kernel::KernelParams& params) {
  const auto p0 = kernel::goal_distribution(scenario, params, kernel::GoalSubset::kAll);
  std::vector<score::ScoreField> fields;
  for (const auto& pt : kernel::perturbed_stack(p0, schedule, scenario.map, params))
    fields.push_back(score::score_field(pt));
  return std::make_shared<FieldStackProvider>(std::move(fields));
}

std::shared_ptr<GaussianMixtureProvider> gaussian_provider(const grid::Scenario& scenario,
                                                           const kernel::KernelSchedule& schedule) {
  std::vector<State> means;
  for (const auto& g : scenario.goals) means.push_back(center_of(g.cell));
  if (means.empty()) throw InvalidArgument("gaussian_provider: scenario has no goals");
  std::vector<double> weights(means.size(), 1.0 / static_cast<double>(means.size()));
  std::vector<double> sigmas;
  for (int t = 1; t <= schedule.T; ++t) sigmas.push_back(noise_sigma(t, schedule, scenario.map.width()));
  return std::make_shared<GaussianMixtureProvider>(std::move(means), std::move(weights), std::move(sigmas));
}

Trajectory sample_trajectory(const grid::Scenario& scenario, const ScoreProvider& provider, const State& x_init,
                             const kernel::KernelSchedule& schedule, const SamplerConfig& config, std::uint64_t seed,
                             const CollisionPolicy& policy) {
  config.validate();
  schedule.validate();
  const auto& map = scenario.map;
  if (!map.state_is_free(x_init)) throw InvalidArgument("sample_trajectory: x_init is not in a free cell");
  if (provider.levels() < schedule.T) throw InvalidArgument("sample_trajectory: provider has too few levels");

  // The update runs in coordinates scaled by 1/L. Converted back to cells, the drift
  // picks up L^2 (one L from the score, one from the position) and the noise L.
  const double L = config.domain_scale > 0.0 ? config.domain_scale : std::max(map.width(), map.height());
  const double hi_x = map.width() - 1.0;
  const double hi_y = map.height() - 1.0;

  Trajectory traj;
  traj.seed = seed;
  traj.states.reserve(static_cast<std::size_t>(schedule.T) * config.inner_iters + 1);
  traj.steps.reserve(static_cast<std::size_t>(schedule.T) * config.inner_iters);
  traj.states.push_back(x_init);
  Rng rng(seed);
  State s = x_init;

  for (int t = schedule.T; t >= 1 && !traj.frozen; --t) {
    const auto c = step_scales(alpha(t, schedule, config, map.width()), config.mode, config.k1, config.k2);
    const double drift_scale = c.drift * L * L;
    const double noise_scale = c.noise * L;
    for (int it = 0; it < config.inner_iters; ++it) {
      Vec2 drift = drift_scale * provider.score(s, t);
      if (config.max_drift > 0.0) {
        const double m = drift.norm();
        if (m > config.max_drift) drift = (config.max_drift / m) * drift;
      }
      StepRecord rec{t, false, 0, false};
      while (true) {
        const Vec2 z = rng.normal2();
        State next{s.x + drift.x + noise_scale * z.x, s.y + drift.y + noise_scale * z.y};
        if (policy.clamp_to_domain) {
          next.x = std::clamp(next.x, 0.0, hi_x);
          next.y = std::clamp(next.y, 0.0, hi_y);
        }
        ++traj.proposals;
        if (grid::segment_free(map, s, next)) {
          s = next;
          rec.accepted = true;
          break;
        }
        ++traj.rejections;
        ++rec.rejected_count;
        if (!policy.redraw || rec.rejected_count >= config.max_reject) {
          rec.frozen = true;
          break;
        }
      }
      traj.steps.push_back(rec);
      if (rec.frozen) {
        traj.frozen = true;
        break;
      }
      traj.states.push_back(s);
    }
  }
  return traj;
}

std::string trajectory_to_json(const Trajectory& trajectory) {
  nlohmann::ordered_json j;
  j["seed"] = trajectory.seed;
  j["frozen"] = trajectory.frozen;
  auto states = nlohmann::ordered_json::array();
  for (const auto& s : trajectory.states) states.push_back({s.x, s.y});
  j["states"] = std::move(states);
  return j.dump();
}

Trajectory trajectory_from_json(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("trajectory JSON: ") + e.what(), e.byte);
  }
  try {
    Trajectory t;
    t.seed = j.at("seed").get<std::uint64_t>();
    t.frozen = j.at("frozen").get<bool>();
    for (const auto& s : j.at("states")) t.states.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
    if (t.states.empty()) throw InvalidArgument("trajectory JSON: no states");
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("trajectory JSON: ") + e.what());
  }
}

}  // namespace heatplan::sampler
