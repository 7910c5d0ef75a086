#include "heatplan/scorematch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heatplan/parallel.hpp"
#include "json.hpp"

namespace heatplan::scorematch {

TabulatedScoreModel::TabulatedScoreModel(int levels, int width, int height)
    : levels_(levels), width_(width), height_(height),
      params_(static_cast<std::size_t>(levels) * width * height) {
  if (levels < 1 || width < 2 || height < 2) throw InvalidArgument("TabulatedScoreModel: bad dimensions");
}

std::span<Vec2> TabulatedScoreModel::level(int t) {
  if (t < 1 || t > levels_) throw InvalidArgument("model level out of range");
  const std::size_t n = static_cast<std::size_t>(width_) * height_;
  return {params_.data() + (t - 1) * n, n};
}

std::span<const Vec2> TabulatedScoreModel::level(int t) const {
  return const_cast<TabulatedScoreModel*>(this)->level(t);
}

Vec2 TabulatedScoreModel::score(const State& s, int t) const { return score::bilinear(level(t), width_, height_, s); }

CategoricalSampler::CategoricalSampler(std::span<const double> p, int width, int height)
    : width_(width), height_(height), cdf_(p.size()) {
  if (p.size() != static_cast<std::size_t>(width) * height) throw InvalidArgument("CategoricalSampler: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0)) throw InvalidArgument("CategoricalSampler: negative probability");
    acc += p[i];
    cdf_[i] = acc;
  }
  if (!(acc > 0.0)) throw InvalidArgument("CategoricalSampler: zero total mass");
}

Cell CategoricalSampler::draw_cell(Rng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  const auto i = static_cast<std::size_t>(it - cdf_.begin());
  return {static_cast<int>(i % width_), static_cast<int>(i / width_)};
}

State CategoricalSampler::draw(Rng& rng) const {
  const Cell c = draw_cell(rng);
  const double jx = rng.uniform(-0.5, 0.5);
  const double jy = rng.uniform(-0.5, 0.5);
  return {std::clamp(c.x + jx, 0.0, width_ - 1.0), std::clamp(c.y + jy, 0.0, height_ - 1.0)};
}

State sample_from_field(const kernel::ProbabilityField& p, Rng& rng) { return CategoricalSampler(p).draw(rng); }

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("train learning_rate must be > 0");
  if (batch_size < 1) throw InvalidArgument("train batch_size must be >= 1");
  if (n_iterations < 0) throw InvalidArgument("train n_iterations must be >= 0");
  if (!(support_threshold > 0.0 && support_threshold < 1.0))
    throw InvalidArgument("train support_threshold must lie in (0, 1)");
}

DsmTargets::DsmTargets(const grid::Scenario& scenario, const kernel::KernelSchedule& schedule,
                       const kernel::KernelParams& params, double support_threshold, int threads)
    : levels_(schedule.T), width_(scenario.map.width()), height_(scenario.map.height()) {
  const auto p0 = kernel::goal_distribution(scenario, params, kernel::GoalSubset::kAll);
  double acc = 0.0;
  for (std::size_t i = 0; i < p0.values().size(); ++i) {
    if (p0.values()[i] >= support_threshold) {
      sources_.push_back(scenario.map.cell_at(i));
      acc += p0.values()[i];
      source_cdf_.push_back(acc);
    }
  }
  if (sources_.empty()) throw InvalidArgument("DsmTargets: p0 has no cell above the support threshold");

  std::vector<std::vector<Entry>> entries(sources_.size());
  parallel_for(sources_.size(), threads, [&](std::size_t i) {
    const auto stack = kernel::kernel_stack_from_source(sources_[i], schedule, scenario.map, params);
    entries[i].reserve(stack.size());
    for (const auto& p : stack) entries[i].push_back({CategoricalSampler(p), score::score_field(p)});
  });
  entries_ = std::move(entries);
  builds_ = sources_.size();
}

DsmSample DsmTargets::draw(int t, Rng& rng) const {
  if (t < 1 || t > levels_) throw InvalidArgument("DsmTargets::draw: level out of range");
  const double u = rng.uniform() * source_cdf_.back();
  auto it = std::upper_bound(source_cdf_.begin(), source_cdf_.end(), u);
  if (it == source_cdf_.end()) --it;
  const auto src = static_cast<std::size_t>(it - source_cdf_.begin());
  return {t, src, entries_[src][static_cast<std::size_t>(t - 1)].sampler.draw(rng)};
}

Vec2 DsmTargets::target(const DsmSample& sample) const {
  return score::score_at(entries_.at(sample.source).at(static_cast<std::size_t>(sample.t - 1)).score, sample.xt);
}

double dsm_loss(const sampler::ScoreProvider& model, const DsmTargets& targets, std::span<const DsmSample> batch,
                const kernel::KernelSchedule& schedule) {
  if (batch.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& b : batch) {
    const Vec2 r = model.score(b.xt, b.t) - targets.target(b);
    acc += sampler::lambda(b.t, schedule, targets.width()) * r.dot(r);
  }
  return acc / static_cast<double>(batch.size());
}

TrainResult train(const grid::Scenario& scenario, const kernel::KernelSchedule& schedule,
                  const kernel::KernelParams& params, const TrainConfig& config) {
  config.validate();
  schedule.validate();
  const DsmTargets targets(scenario, schedule, params, config.support_threshold, config.threads);
  const int w = scenario.map.width();
  const int h = scenario.map.height();
  TrainResult result{TabulatedScoreModel(schedule.T, w, h), {}, targets.kernel_builds()};
  auto& model = result.model;
  result.loss_history.reserve(static_cast<std::size_t>(config.n_iterations));

  std::vector<double> lam(static_cast<std::size_t>(schedule.T) + 1);
  for (int t = 1; t <= schedule.T; ++t) lam[t] = sampler::lambda(t, schedule, w);

  // Accumulated squared bilinear weight per entry. Dividing the gradient by lambda(t) and by
  // this count turns every entry's update into a running weighted mean of its targets.
  const std::size_t per_level = static_cast<std::size_t>(w) * h;
  std::vector<double> seen(per_level * schedule.T, 0.0);
  std::vector<Vec2> grad(per_level * schedule.T);
  std::vector<double> gw(per_level * schedule.T, 0.0);
  std::vector<std::uint8_t> mark(per_level * schedule.T, 0);
  std::vector<std::size_t> touched;

  std::vector<DsmSample> batch(static_cast<std::size_t>(config.batch_size));
  for (int iter = 0; iter < config.n_iterations; ++iter) {
    Rng rng(hash64(config.seed, static_cast<std::uint64_t>(iter)));
    for (std::size_t b = 0; b < batch.size(); ++b) batch[b] = targets.draw(static_cast<int>(b % schedule.T) + 1, rng);

    double loss = 0.0;
    touched.clear();
    for (const auto& s : batch) {
      const auto taps = score::bilinear_taps(w, h, s.xt);
      const std::size_t base = per_level * static_cast<std::size_t>(s.t - 1);
      const auto F = model.level(s.t);
      Vec2 m;
      for (int k = 0; k < 4; ++k) m += taps.weight[k] * F[taps.index[k]];
      const Vec2 r = m - targets.target(s);
      loss += lam[s.t] * r.dot(r);
      for (int k = 0; k < 4; ++k) {
        const std::size_t j = base + taps.index[k];
        if (!mark[j]) {
          mark[j] = 1;
          touched.push_back(j);
        }
        // d/dF_j of lambda |r|^2, then divided by lambda.
        grad[j] += (2.0 * taps.weight[k]) * r;
        gw[j] += taps.weight[k] * taps.weight[k];
      }
    }
    loss /= static_cast<double>(batch.size());
    if (!std::isfinite(loss)) throw Error("training diverged: loss is not finite at iteration " + std::to_string(iter));
    result.loss_history.push_back(loss);

    std::sort(touched.begin(), touched.end());
    for (const std::size_t j : touched) {
      seen[j] += gw[j];
      const std::size_t level = j / per_level;
      auto F = model.level(static_cast<int>(level) + 1);
      F[j - level * per_level] += (-0.5 * config.learning_rate / std::max(seen[j], 1.0)) * grad[j];
      grad[j] = {};
      gw[j] = 0.0;
      mark[j] = 0;
    }
  }
  return result;
}

std::vector<double> window_means(std::span<const double> values, std::size_t window) {
  std::vector<double> out;
  if (window == 0) return out;
  for (std::size_t i = 0; i + window <= values.size(); i += window) {
    double acc = 0.0;
    for (std::size_t k = i; k < i + window; ++k) acc += values[k];
    out.push_back(acc / static_cast<double>(window));
  }
  return out;
}

namespace {

// Upper-tail standard normal quantile by bisection on erfc.
double normal_upper_quantile(double p) {
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(mid / std::sqrt(2.0)) > p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

LossTrend loss_trend(std::span<const double> history, std::size_t window, double alpha) {
  LossTrend out;
  if (window < 2 || history.size() < 2 * window) return out;
  std::vector<double> se;
  for (std::size_t i = 0; i + window <= history.size(); i += window) {
    double m = 0.0;
    for (std::size_t k = i; k < i + window; ++k) m += history[k];
    m /= static_cast<double>(window);
    double v = 0.0;
    for (std::size_t k = i; k < i + window; ++k) v += (history[k] - m) * (history[k] - m);
    v /= static_cast<double>(window - 1);
    out.means.push_back(m);
    se.push_back(std::sqrt(v / static_cast<double>(window)));
  }
  const std::size_t comparisons = out.means.size() - 1;
  out.z_critical = normal_upper_quantile(alpha / static_cast<double>(comparisons));
  out.worst_z = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b + 1 < out.means.size(); ++b) {
    const double rise = out.means[b + 1] - out.means[b];
    const double s = std::sqrt(se[b] * se[b] + se[b + 1] * se[b + 1]);
    const double z = s > 0.0 ? rise / s : (rise > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    out.worst_z = std::max(out.worst_z, z);
  }
  out.non_increasing = out.worst_z <= out.z_critical && out.means.back() < out.means.front();
  return out;
}

double field_cosine(std::span<const Vec2> a, std::span<const Vec2> b, std::span<const std::uint8_t> mask) {
  if (a.size() != b.size() || a.size() != mask.size()) throw InvalidArgument("field_cosine: size mismatch");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask[i]) continue;
    ab += a[i].dot(b[i]);
    aa += a[i].dot(a[i]);
    bb += b[i].dot(b[i]);
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

io::FieldDump level_dump(const TabulatedScoreModel& model, int t) {
  io::FieldDump d{static_cast<std::uint32_t>(model.width()), static_cast<std::uint32_t>(model.height()), 2, {}};
  for (const auto& v : model.level(t)) {
    d.values.push_back(v.x);
    d.values.push_back(v.y);
  }
  return d;
}

void load_level(TabulatedScoreModel& model, int t, const io::FieldDump& dump) {
  if (static_cast<int>(dump.width) != model.width() || static_cast<int>(dump.height) != model.height() ||
      dump.channels != 2)
    throw InvalidArgument("model level dump does not match model dimensions");
  auto F = model.level(t);
  for (std::size_t i = 0; i < F.size(); ++i) F[i] = {dump.values[2 * i], dump.values[2 * i + 1]};
}

std::string manifest_json(const TabulatedScoreModel& model, const kernel::KernelSchedule& schedule) {
  nlohmann::ordered_json j;
  j["T"] = model.levels();
  j["width"] = model.width();
  j["height"] = model.height();
  j["schedule"] = {{"T", schedule.T}, {"k_min", schedule.k_min}, {"k_max", schedule.k_max}};
  return j.dump(2) + "\n";
}

}  // namespace heatplan::scorematch
