#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "heatplan/gridmap.hpp"
#include "heatplan/kernel.hpp"
#include "heatplan/score.hpp"

namespace heatplan::sampler {

enum class Mode { kStandard, kModified };
std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct SamplerConfig {
  double epsilon = 0.0008;
  int inner_iters = 100;
  Mode mode = Mode::kModified;
  double k1 = 0.6;
  double k2 = 0.4;
  int max_reject = 32;
  // Length unit of the Langevin update, in cells. 0 means max(width, height).
  double domain_scale = 0.0;
  // Upper bound on the drift displacement per step, in cells. 0 disables the clip.
  double max_drift = 1.0;

  void validate() const;
};

// lambda(t) = min(sqrt(2 k(t)), width / 2)^2
double noise_sigma(int t, const kernel::KernelSchedule& schedule, int width);
double lambda(int t, const kernel::KernelSchedule& schedule, int width);
// epsilon * lambda(t) / lambda(T)
double alpha(int t, const kernel::KernelSchedule& schedule, const SamplerConfig& config, int width);

struct StepScales {
  double drift = 0.0;
  double noise = 0.0;
};
StepScales step_scales(double alpha_t, Mode mode, double k1, double k2);

State langevin_step(const State& s, const Vec2& score, double alpha_t, const Vec2& noise, Mode mode, double k1,
                    double k2);

// Score of the perturbed distribution at level t, in 1/cell.
class ScoreProvider {
 public:
  virtual ~ScoreProvider() = default;
  virtual Vec2 score(const State& s, int t) const = 0;
  virtual int levels() const = 0;
};

class FieldStackProvider : public ScoreProvider {
 public:
  explicit FieldStackProvider(std::vector<score::ScoreField> fields);
  Vec2 score(const State& s, int t) const override;
  int levels() const override { return static_cast<int>(fields_.size()); }
  const score::ScoreField& field(int t) const { return fields_.at(static_cast<std::size_t>(t - 1)); }

 private:
  std::vector<score::ScoreField> fields_;
};

class GaussianMixtureProvider : public ScoreProvider {
 public:
  // sigmas[t-1] is the component std at level t.
  GaussianMixtureProvider(std::vector<State> means, std::vector<double> weights, std::vector<double> sigmas);
  Vec2 score(const State& s, int t) const override;
  int levels() const override { return static_cast<int>(sigmas_.size()); }

 private:
  std::vector<State> means_;
  std::vector<double> weights_;
  std::vector<double> sigmas_;
};

// Exact scores of finalize(evolve(p0)) over all goals, one field per level.
std::shared_ptr<FieldStackProvider> exact_provider(const grid::Scenario& scenario,
                                                   const kernel::KernelSchedule& schedule,
                                                   const kernel::KernelParams& params);

// Equal-weight mixture over every goal with sigma_t = min(sqrt(2 k(t)), width / 2).
std::shared_ptr<GaussianMixtureProvider> gaussian_provider(const grid::Scenario& scenario,
                                                           const kernel::KernelSchedule& schedule);

struct StepRecord {
  int level = 0;
  bool accepted = false;
  int rejected_count = 0;
  bool frozen = false;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<State> states;
  std::vector<StepRecord> steps;
  bool frozen = false;
  std::uint64_t proposals = 0;
  std::uint64_t rejections = 0;

  const State& final_state() const { return states.back(); }
};

// What happens when a proposal leaves the free space.
struct CollisionPolicy {
  // true: redraw the noise up to max_reject times. false: freeze at once.
  bool redraw = true;
  // Clamp proposals into the domain before the obstacle test.
  bool clamp_to_domain = false;
};

Trajectory sample_trajectory(const grid::Scenario& scenario, const ScoreProvider& provider, const State& x_init,
                             const kernel::KernelSchedule& schedule, const SamplerConfig& config, std::uint64_t seed,
                             const CollisionPolicy& policy = {});

// {"seed":..,"frozen":..,"states":[[x,y],..]}
std::string trajectory_to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const std::string& line);

}  // namespace heatplan::sampler
