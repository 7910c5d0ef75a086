#include "heatplan/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "heatplan/parallel.hpp"

namespace heatplan::eval {

void EvalConfig::validate() const {
  if (n_episodes < 1 || n_samples < 1) throw InvalidArgument("eval n_episodes and n_samples must be >= 1");
  if (!(success_radius > 0.0)) throw InvalidArgument("eval success_radius must be > 0");
  if (!(kl_smoothing > 0.0)) throw InvalidArgument("eval kl_smoothing must be > 0");
}

namespace {

bool within(const State& s, const Cell& g, double r) {
  const Vec2 d = s - center_of(g);
  return d.dot(d) <= r * r;
}

}  // namespace

double success_rate(std::span<const State> finals, const grid::Scenario& scenario, double r) {
  if (finals.empty()) throw InvalidArgument("success_rate: no states");
  std::size_t hits = 0;
  for (const auto& s : finals) {
    for (const auto& g : scenario.goals) {
      if (g.reachable && within(s, g.cell, r)) {
        ++hits;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(finals.size());
}

double kl_divergence(std::span<const State> finals, const kernel::ProbabilityField& p_goal, const grid::GridMap& map,
                     double delta) {
  if (p_goal.width() != map.width() || p_goal.height() != map.height())
    throw InvalidArgument("kl_divergence: field does not match map");
  if (!(delta > 0.0)) throw InvalidArgument("kl_divergence: delta must be > 0");
  std::vector<double> hist(map.cell_count(), 0.0);
  for (const auto& s : finals) {
    Cell c = cell_of(s);
    c.x = std::clamp(c.x, 0, map.width() - 1);
    c.y = std::clamp(c.y, 0, map.height() - 1);
    hist[map.index(c)] += 1.0;
  }
  const double n = finals.empty() ? 1.0 : static_cast<double>(finals.size());
  const auto mask = map.obstacle_mask();
  double z = 0.0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    hist[i] = mask[i] ? 0.0 : hist[i] / n + delta;
    z += hist[i];
  }
  double kl = 0.0;
  const auto p = p_goal.values();
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / (hist[i] / z));
  }
  return kl;
}

namespace {

class OursPlanner : public EpisodePlanner {
 public:
  OursPlanner(const grid::Scenario& scenario, const ModelSettings& s)
      : scenario_(scenario), settings_(s), provider_(sampler::exact_provider(scenario, s.schedule, s.kernel)) {}
  sampler::Trajectory sample(const State& x, std::uint64_t seed) const override {
    return sampler::sample_trajectory(scenario_, *provider_, x, settings_.schedule, settings_.sampler, seed);
  }

 private:
  const grid::Scenario& scenario_;
  ModelSettings settings_;
  std::shared_ptr<sampler::FieldStackProvider> provider_;
};

class GaussianPlanner : public EpisodePlanner {
 public:
  GaussianPlanner(const grid::Scenario& scenario, const ModelSettings& s, bool with_rrt)
      : scenario_(scenario), settings_(s), with_rrt_(with_rrt) {}
  sampler::Trajectory sample(const State& x, std::uint64_t seed) const override {
    if (with_rrt_)
      return baselines::gaussian_plus_rrt(scenario_, settings_.schedule, settings_.sampler, settings_.rrt, x, seed);
    return baselines::gaussian_diffusion_sample(scenario_, settings_.schedule, settings_.sampler, x, seed);
  }

 private:
  const grid::Scenario& scenario_;
  ModelSettings settings_;
  bool with_rrt_;
};

class BCPlanner : public EpisodePlanner {
 public:
  BCPlanner(const grid::Scenario& scenario, const ModelSettings& s)
      : scenario_(scenario),
        model_([&] {
          const auto experts = baselines::geodesic_experts(scenario);
          return baselines::bc_fit(experts, scenario.map.width(), scenario.map.height());
        }()),
        steps_(s.bc_steps > 0 ? s.bc_steps : s.schedule.T * s.sampler.inner_iters) {}
  sampler::Trajectory sample(const State& x, std::uint64_t seed) const override {
    auto t = baselines::bc_rollout(model_, scenario_, x, steps_);
    t.seed = seed;
    return t;
  }

 private:
  const grid::Scenario& scenario_;
  baselines::BCFieldModel model_;
  int steps_;
};

class SimpleModel : public PlannerModel {
 public:
  SimpleModel(std::string name, ModelSettings s) : name_(std::move(name)), settings_(std::move(s)) {
    settings_.schedule.validate();
    settings_.kernel.validate();
    settings_.sampler.validate();
    settings_.rrt.validate();
  }
  std::string name() const override { return name_; }
  std::unique_ptr<EpisodePlanner> prepare(const grid::Scenario& scenario) const override {
    if (name_ == "ours") return std::make_unique<OursPlanner>(scenario, settings_);
    if (name_ == "gaussian") return std::make_unique<GaussianPlanner>(scenario, settings_, false);
    if (name_ == "gaussian_rrt") return std::make_unique<GaussianPlanner>(scenario, settings_, true);
    return std::make_unique<BCPlanner>(scenario, settings_);
  }

 private:
  std::string name_;
  ModelSettings settings_;
};

}  // namespace

std::unique_ptr<PlannerModel> make_ours(const ModelSettings& s) { return std::make_unique<SimpleModel>("ours", s); }
std::unique_ptr<PlannerModel> make_gaussian(const ModelSettings& s) {
  return std::make_unique<SimpleModel>("gaussian", s);
}
std::unique_ptr<PlannerModel> make_gaussian_rrt(const ModelSettings& s) {
  return std::make_unique<SimpleModel>("gaussian_rrt", s);
}
std::unique_ptr<PlannerModel> make_bc(const ModelSettings& s) { return std::make_unique<SimpleModel>("bc", s); }

std::vector<std::string> model_names() { return {"ours", "gaussian", "gaussian_rrt", "bc"}; }

std::unique_ptr<PlannerModel> make_model(const std::string& name, const ModelSettings& settings) {
  for (const auto& n : model_names())
    if (n == name) return std::make_unique<SimpleModel>(name, settings);
  throw InvalidArgument("unknown model '" + name + "'");
}

const Row& MetricsTable::find(const std::string& model, const std::string& scenario) const {
  for (const auto& r : rows)
    if (r.model == model && r.scenario == scenario) return r;
  throw InvalidArgument("no metrics row for " + model + "/" + scenario);
}

std::string MetricsTable::to_csv() const {
  std::ostringstream out;
  out << "model,scenario,success_rate,kl_divergence\n";
  out << std::setprecision(17);
  for (const auto& r : rows) out << r.model << ',' << r.scenario << ',' << r.success_rate << ',' << r.kl_divergence << '\n';
  return out.str();
}

std::uint64_t sample_seed(std::uint64_t base_seed, std::uint64_t episode, std::uint64_t sample) {
  return hash64(base_seed, episode, sample);
}

State initial_state(const grid::Scenario& scenario, std::uint64_t seed) {
  Rng rng(hash64(seed, 0x696e6974ULL));
  return scenario.draw_initial_state(rng);
}

MetricsTable run_benchmark(const std::vector<const PlannerModel*>& models, const BenchmarkRequest& request) {
  request.eval.validate();
  request.map.validate();
  const auto& ec = request.eval;
  const auto n_ep = static_cast<std::size_t>(ec.n_episodes);
  const auto n_s = static_cast<std::size_t>(ec.n_samples);
  MetricsTable table;

  for (const auto kind : request.kinds) {
    grid::MapGenConfig mc = request.map;
    mc.scenario_kind = kind;
    std::vector<std::unique_ptr<grid::Scenario>> scenarios(n_ep);
    std::vector<std::unique_ptr<kernel::ProbabilityField>> p_goal(n_ep);
    parallel_for(n_ep, request.threads, [&](std::size_t e) {
      scenarios[e] = std::make_unique<grid::Scenario>(grid::generate_scenario(mc, ec.base_seed + e));
      p_goal[e] = std::make_unique<kernel::ProbabilityField>(
          kernel::goal_distribution(*scenarios[e], request.kernel, kernel::GoalSubset::kReachableOnly));
    });

    for (const auto* model : models) {
      std::vector<std::unique_ptr<EpisodePlanner>> planners(n_ep);
      std::vector<std::uint8_t> failed(n_ep, 0);
      parallel_for(n_ep, request.threads, [&](std::size_t e) {
        try {
          planners[e] = model->prepare(*scenarios[e]);
        } catch (const Error&) {
          failed[e] = 1;
        }
      });

      struct Outcome {
        State final;
        bool frozen = false;
        std::uint64_t proposals = 0, rejections = 0, states = 0, collisions = 0;
      };
      std::vector<Outcome> outcomes(n_ep * n_s);
      parallel_for(n_ep * n_s, request.threads, [&](std::size_t k) {
        const std::size_t e = k / n_s;
        const auto& sc = *scenarios[e];
        const auto seed = sample_seed(ec.base_seed, e, k % n_s);
        const State x = initial_state(sc, seed);
        Outcome o;
        o.final = x;
        o.frozen = true;
        if (!failed[e]) {
          try {
            const auto traj = planners[e]->sample(x, seed);
            o.final = traj.final_state();
            o.frozen = traj.frozen;
            o.proposals = traj.proposals;
            o.rejections = traj.rejections;
            o.states = traj.states.size();
            for (const auto& s : traj.states) o.collisions += sc.map.state_is_free(s) ? 0 : 1;
          } catch (const Error&) {
            // Counted as a frozen sample at its initial state.
          }
        }
        outcomes[k] = o;
      });

      Row row;
      row.model = model->name();
      row.scenario = grid::to_string(kind);
      row.samples = n_ep * n_s;
      std::uint64_t hits = 0;
      double kl_sum = 0.0;
      std::vector<State> finals(n_s);
      for (std::size_t e = 0; e < n_ep; ++e) {
        const auto& sc = *scenarios[e];
        row.failed_episodes += failed[e];
        if (row.success_by_goal.size() < sc.goals.size()) row.success_by_goal.resize(sc.goals.size(), 0);
        for (std::size_t i = 0; i < n_s; ++i) {
          const auto& o = outcomes[e * n_s + i];
          finals[i] = o.final;
          row.frozen += o.frozen;
          row.proposals += o.proposals;
          row.rejections += o.rejections;
          row.states_checked += o.states;
          row.states_in_collision += o.collisions;
          int best = -1;
          double best_d = 0.0;
          for (std::size_t g = 0; g < sc.goals.size(); ++g) {
            const double d = (o.final - center_of(sc.goals[g].cell)).norm();
            if (!sc.goals[g].reachable && d <= ec.success_radius) ++row.near_unreachable;
            if (sc.goals[g].reachable && d <= ec.success_radius && (best < 0 || d < best_d)) {
              best = static_cast<int>(g);
              best_d = d;
            }
          }
          if (best >= 0) {
            ++hits;
            ++row.success_by_goal[static_cast<std::size_t>(best)];
          }
        }
        kl_sum += kl_divergence(finals, *p_goal[e], sc.map, ec.kl_smoothing);
      }
      row.success_rate = 100.0 * static_cast<double>(hits) / static_cast<double>(row.samples);
      row.kl_divergence = kl_sum / static_cast<double>(n_ep);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace heatplan::eval
