#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heatplan/field_io.hpp"
#include "heatplan/kernel.hpp"
#include "heatplan/sampler.hpp"
#include "heatplan/score.hpp"

namespace heatplan::scorematch {

// One bilinearly interpolated vector grid per level.
class TabulatedScoreModel : public sampler::ScoreProvider {
 public:
  TabulatedScoreModel(int levels, int width, int height);

  Vec2 score(const State& s, int t) const override;
  int levels() const override { return levels_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::span<Vec2> level(int t);
  std::span<const Vec2> level(int t) const;

 private:
  int levels_;
  int width_;
  int height_;
  std::vector<Vec2> params_;
};

// Inverse-CDF draws from a probability field.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(std::span<const double> p, int width, int height);
  explicit CategoricalSampler(const kernel::ProbabilityField& p)
      : CategoricalSampler(p.values(), p.width(), p.height()) {}

  Cell draw_cell(Rng& rng) const;
  // Cell draw plus uniform jitter in (-0.5, 0.5)^2, clamped to the domain.
  State draw(Rng& rng) const;

 private:
  int width_;
  int height_;
  std::vector<double> cdf_;
};

State sample_from_field(const kernel::ProbabilityField& p, Rng& rng);

struct TrainConfig {
  double learning_rate = 1.0;
  int batch_size = 256;
  int n_iterations = 60000;
  std::uint64_t seed = 0;
  // Source cells x0 are the cells where p0 >= this.
  double support_threshold = 1e-6;
  int threads = 1;

  void validate() const;
};

struct DsmSample {
  int t = 1;
  std::size_t source = 0;
  State xt;
};

// Per-source kernel stacks reduced to what training needs: a sampler and a score field per level.
class DsmTargets {
 public:
  DsmTargets(const grid::Scenario& scenario, const kernel::KernelSchedule& schedule,
             const kernel::KernelParams& params, double support_threshold, int threads = 1);

  std::size_t source_count() const { return sources_.size(); }
  const std::vector<Cell>& sources() const { return sources_; }
  // Kernel evolutions performed; one per source.
  std::size_t kernel_builds() const { return builds_; }
  int levels() const { return levels_; }
  int width() const { return width_; }
  int height() const { return height_; }

  // Draws x0 from p0 on the support, then xt from p0t(. | x0).
  DsmSample draw(int t, Rng& rng) const;
  Vec2 target(const DsmSample& sample) const;

 private:
  struct Entry {
    CategoricalSampler sampler;
    score::ScoreField score;
  };
  int levels_;
  int width_;
  int height_;
  std::vector<Cell> sources_;
  std::vector<double> source_cdf_;
  std::vector<std::vector<Entry>> entries_;
  std::size_t builds_ = 0;
};

// Mean of lambda(t) |model(xt, t) - target|^2 over the batch.
double dsm_loss(const sampler::ScoreProvider& model, const DsmTargets& targets, std::span<const DsmSample> batch,
                const kernel::KernelSchedule& schedule);

struct TrainResult {
  TabulatedScoreModel model;
  std::vector<double> loss_history;
  std::size_t kernel_builds = 0;
};

TrainResult train(const grid::Scenario& scenario, const kernel::KernelSchedule& schedule,
                  const kernel::KernelParams& params, const TrainConfig& config);

// Means of consecutive, non-overlapping windows.
std::vector<double> window_means(std::span<const double> values, std::size_t window);

// Trend check on a noisy loss curve. Consecutive non-overlapping windows are compared with a
// one-sided z-test on their means (standard errors from the within-window spread); the curve
// counts as non-increasing when no rise is significant after Bonferroni correction at
// family-wise level `alpha`, and the last window sits below the first.
struct LossTrend {
  std::vector<double> means;
  double worst_z = 0.0;
  double z_critical = 0.0;
  bool non_increasing = false;
};
LossTrend loss_trend(std::span<const double> history, std::size_t window, double alpha = 0.01);

// Flattened cosine between two vector grids over the cells where mask != 0.
double field_cosine(std::span<const Vec2> a, std::span<const Vec2> b, std::span<const std::uint8_t> mask);

io::FieldDump level_dump(const TabulatedScoreModel& model, int t);
void load_level(TabulatedScoreModel& model, int t, const io::FieldDump& dump);
std::string manifest_json(const TabulatedScoreModel& model, const kernel::KernelSchedule& schedule);

}  // namespace heatplan::scorematch
