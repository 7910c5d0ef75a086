#include <cmath>

#include "doctest.h"
#include "heatplan/scorematch.hpp"
#include "json.hpp"

using namespace heatplan;
using namespace heatplan::scorematch;
using grid::GridMap;
using kernel::KernelSchedule;

namespace {

grid::Scenario open_scenario() { return {GridMap(32, 32), {{{16, 12}, true}}, {4, 24, 6, 6}, 0}; }

KernelSchedule short_schedule() {
  KernelSchedule s;
  s.T = 4;
  s.k_max = 200.0;
  return s;
}

}  // namespace

TEST_CASE("categorical draws from a delta stay in its cell") {
  std::vector<double> p(64 * 64, 0.0);
  p[20 * 64 + 10] = 1.0;
  const kernel::ProbabilityField f(64, 64, p, kernel::FieldRole::kP0);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const State s = sample_from_field(f, rng);
    CHECK((s.x >= 9.5 && s.x < 10.5 && s.y >= 19.5 && s.y < 20.5));
  }
}

TEST_CASE("categorical frequencies") {
  std::vector<double> p(16, 0.0);
  p[1] = 0.5;
  p[6] = 0.3;
  p[13] = 0.2;
  const CategoricalSampler cs(p, 4, 4);
  Rng rng(2);
  std::vector<int> count(16, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Cell c = cs.draw_cell(rng);
    ++count[static_cast<std::size_t>(c.y * 4 + c.x)];
  }
  for (int i = 0; i < 16; ++i) CHECK(std::abs(count[i] / static_cast<double>(n) - p[i]) <= 0.01);
}

TEST_CASE("masked fields never yield obstacle draws") {
  const auto sc = grid::generate_scenario(grid::MapGenConfig{}, 3);
  const auto p = kernel::perturbed_distribution(
      kernel::goal_distribution(sc, kernel::KernelParams{}, kernel::GoalSubset::kAll), 5, KernelSchedule{}, sc.map,
      kernel::KernelParams{});
  Rng rng(4);
  for (int i = 0; i < 20000; ++i) REQUIRE(sc.map.is_free(cell_of(sample_from_field(p, rng))));
}

TEST_CASE("train config validation") {
  TrainConfig c;
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("perfect model has zero loss") {
  const auto sc = open_scenario();
  const auto sched = short_schedule();
  const kernel::KernelParams kp;
  const auto p0 = kernel::goal_distribution(sc, kp, kernel::GoalSubset::kAll);
  double peak = 0;
  for (double v : p0.values()) peak = std::max(peak, v);
  // Threshold at the peak leaves a single source cell.
  const DsmTargets targets(sc, sched, kp, peak * 0.999);
  REQUIRE(targets.source_count() == 1);
  CHECK(targets.sources()[0] == Cell{16, 12});

  TabulatedScoreModel model(sched.T, 32, 32);
  for (int t = 1; t <= sched.T; ++t) {
    const auto f = score::score_field(kernel::kernel_from_source({16, 12}, t, sched, sc.map, kp));
    std::copy(f.vectors().begin(), f.vectors().end(), model.level(t).begin());
  }
  std::vector<DsmSample> centers;
  for (int t = 1; t <= sched.T; ++t)
    for (int y = 5; y < 20; ++y) centers.push_back({t, 0, {static_cast<double>(y), static_cast<double>(y + 2)}});
  CHECK(dsm_loss(model, targets, centers, sched) == 0.0);

  Rng rng(8);
  std::vector<DsmSample> jittered;
  for (int i = 0; i < 512; ++i) jittered.push_back(targets.draw(i % sched.T + 1, rng));
  CHECK(dsm_loss(model, targets, jittered, sched) <= 1e-6);
}

TEST_CASE("zero model loses to the exact perturbed score") {
  const auto sc = grid::generate_scenario(grid::MapGenConfig{}, 1);
  const auto sched = short_schedule();
  const kernel::KernelParams kp;
  const DsmTargets targets(sc, sched, kp, 1e-6);
  Rng rng(11);
  std::vector<DsmSample> batch;
  for (int i = 0; i < 1024; ++i) batch.push_back(targets.draw(i % sched.T + 1, rng));

  const TabulatedScoreModel zero(sched.T, 64, 64);
  double direct = 0;
  for (const auto& b : batch) {
    const Vec2 g = targets.target(b);
    direct += sampler::lambda(b.t, sched, 64) * g.dot(g);
  }
  const double zero_loss = dsm_loss(zero, targets, batch, sched);
  CHECK(zero_loss == doctest::Approx(direct / 1024.0).epsilon(1e-12));

  const auto p0 = kernel::goal_distribution(sc, kp, kernel::GoalSubset::kAll);
  const auto stack = kernel::perturbed_stack(p0, sched, sc.map, kp);
  TabulatedScoreModel exact(sched.T, 64, 64);
  for (int t = 1; t <= sched.T; ++t) {
    const auto f = score::score_field(stack[static_cast<std::size_t>(t - 1)]);
    std::copy(f.vectors().begin(), f.vectors().end(), exact.level(t).begin());
  }
  const double exact_loss = dsm_loss(exact, targets, batch, sched);
  CHECK(exact_loss >= 0.0);
  CHECK(zero_loss > exact_loss);
}

TEST_CASE("short training run: deterministic, thread independent, improving") {
  const auto sc = grid::generate_scenario(grid::MapGenConfig{}, 2);
  const auto sched = short_schedule();
  TrainConfig cfg;
  cfg.n_iterations = 600;
  cfg.batch_size = 64;
  cfg.seed = 5;
  const auto a = train(sc, sched, kernel::KernelParams{}, cfg);
  cfg.threads = 3;
  const auto b = train(sc, sched, kernel::KernelParams{}, cfg);
  CHECK(a.loss_history == b.loss_history);
  for (int t = 1; t <= sched.T; ++t) CHECK(std::equal(a.model.level(t).begin(), a.model.level(t).end(), b.model.level(t).begin()));
  CHECK(a.loss_history.size() == 600);
  const auto w = window_means(a.loss_history, 100);
  CHECK(w.back() < w.front());
  // One kernel stack per source cell.
  const DsmTargets targets(sc, sched, kernel::KernelParams{}, cfg.support_threshold);
  CHECK(a.kernel_builds == targets.source_count());
}

TEST_CASE("divergence names the iteration") {
  const auto sc = open_scenario();
  TrainConfig cfg;
  cfg.n_iterations = 50;
  cfg.learning_rate = 1e308;
  try {
    train(sc, short_schedule(), kernel::KernelParams{}, cfg);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("iteration") != std::string::npos);
  }
}

TEST_CASE("window means and loss trend") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7};
  CHECK(window_means(v, 3) == std::vector<double>{2, 5});

  Rng rng(3);
  std::vector<double> falling, rising;
  for (int i = 0; i < 2000; ++i) {
    falling.push_back(10.0 * std::exp(-i / 500.0) + rng.normal());
    rising.push_back(1.0 + i / 100.0 + 0.1 * rng.normal());
  }
  CHECK(loss_trend(falling, 100).non_increasing);
  CHECK_FALSE(loss_trend(rising, 100).non_increasing);
}

TEST_CASE("field cosine") {
  const std::vector<Vec2> a{{1, 0}, {0, 1}, {5, 5}};
  const std::vector<Vec2> b{{2, 0}, {0, 3}, {-5, -5}};
  const std::vector<std::uint8_t> first_two{1, 1, 0};
  CHECK(field_cosine(a, b, first_two) == doctest::Approx(5.0 / (std::sqrt(2.0) * std::sqrt(13.0))));
  const std::vector<std::uint8_t> all{1, 1, 1};
  const double ref = (2 + 3 - 50) / (std::sqrt(1 + 1 + 50.0) * std::sqrt(4 + 9 + 50.0));
  CHECK(field_cosine(a, b, all) == doctest::Approx(ref));
}

TEST_CASE("checkpoint round trip") {
  TabulatedScoreModel m(3, 5, 4);
  Rng rng(6);
  for (int t = 1; t <= 3; ++t)
    for (auto& v : m.level(t)) v = {rng.normal(), rng.normal()};
  TabulatedScoreModel back(3, 5, 4);
  for (int t = 1; t <= 3; ++t) {
    const auto d = io::decode_field(io::encode_field(level_dump(m, t)));
    CHECK(d.channels == 2);
    load_level(back, t, d);
    CHECK(std::equal(m.level(t).begin(), m.level(t).end(), back.level(t).begin()));
  }
  io::FieldDump wrong{4, 4, 2, std::vector<double>(32)};
  CHECK_THROWS(load_level(back, 1, wrong));
  KernelSchedule s;
  s.T = 3;
  const auto j = nlohmann::json::parse(manifest_json(m, s));
  CHECK(j["T"] == 3);
  CHECK(j["width"] == 5);
  CHECK(j["height"] == 4);
  CHECK(j.contains("schedule"));
}
