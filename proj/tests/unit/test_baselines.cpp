#include <cmath>

#include "doctest.h"
#include "heatplan/baselines/bc.hpp"
#include "heatplan/baselines/gaussian.hpp"
#include "heatplan/baselines/rrt_star.hpp"
#include "heatplan/eval.hpp"
#include "json.hpp"

using namespace heatplan;
using namespace heatplan::baselines;
using grid::GridMap;
using kernel::KernelSchedule;
using sampler::Trajectory;

namespace {

Trajectory two_states(State a, State b) {
  Trajectory t;
  t.states = {a, b};
  return t;
}

double path_length(const std::vector<State>& p) {
  double len = 0;
  for (std::size_t i = 1; i < p.size(); ++i) len += (p[i] - p[i - 1]).norm();
  return len;
}

bool dense_samples_free(const GridMap& m, const std::vector<State>& p) {
  for (std::size_t i = 1; i < p.size(); ++i) {
    const Vec2 d = p[i] - p[i - 1];
    const int n = std::max(1, static_cast<int>(std::ceil(d.norm() / 0.25)));
    for (int k = 0; k <= n; ++k) {
      const double f = static_cast<double>(k) / n;
      if (!m.state_is_free({p[i - 1].x + f * d.x, p[i - 1].y + f * d.y})) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("bc averages conflicting modes and leaves unvisited cells at zero") {
  const std::vector<Trajectory> ex{two_states({3, 3}, {4, 3}), two_states({3, 3}, {2, 3})};
  const auto m = bc_fit(ex, 8, 8);
  CHECK(m.at({3, 3}) == Vec2{0, 0});
  CHECK(m.at({6, 6}) == Vec2{0, 0});
  CHECK_THROWS_AS(bc_fit(std::vector<Trajectory>{}, 8, 8), InvalidArgument);
}

TEST_CASE("bc fit minimizes per-cell squared error") {
  Rng rng(4);
  std::vector<Trajectory> ex;
  for (int i = 0; i < 200; ++i) {
    const State a{static_cast<double>(rng.uniform_int(0, 5)), static_cast<double>(rng.uniform_int(0, 5))};
    ex.push_back(two_states(a, {a.x + rng.normal(), a.y + rng.normal()}));
  }
  const auto m = bc_fit(ex, 6, 6);
  auto mse = [&](const std::vector<Vec2>& field) {
    double e = 0;
    for (const auto& t : ex) {
      const Vec2 d = t.states[1] - t.states[0];
      const Vec2 r = d - field[static_cast<std::size_t>(cell_of(t.states[0]).y * 6 + cell_of(t.states[0]).x)];
      e += r.dot(r);
    }
    return e;
  };
  std::vector<Vec2> f(m.field().begin(), m.field().end());
  const double base = mse(f);
  for (std::size_t i = 0; i < f.size(); ++i)
    for (const Vec2 bump : {Vec2{1e-3, 0}, Vec2{0, -1e-3}}) {
      auto g = f;
      g[i] += bump;
      CHECK(mse(g) > base);
    }
}

TEST_CASE("geodesic experts point toward a single goal") {
  const auto sc = grid::generate_scenario(grid::MapGenConfig{}, 7);
  const auto experts = geodesic_experts(sc);
  const auto m = bc_fit(experts, 64, 64);
  const State g = center_of(sc.goals[0].cell);
  int visited = 0, toward = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const Vec2 v = m.at({x, y});
      if (v.norm() == 0.0) continue;
      ++visited;
      toward += v.dot(g - center_of({x, y})) > 0.0;
    }
  CHECK(visited > 1000);
  CHECK(toward >= 0.95 * visited);
}

TEST_CASE("bc rollout fixed point and freezing") {
  const auto sc = grid::generate_scenario(grid::MapGenConfig{}, 1);
  const BCFieldModel zero(64, 64, std::vector<Vec2>(64 * 64));
  const State x0 = center_of(sc.initial_region.cells()[3]);
  const auto tr = bc_rollout(zero, sc, x0, 20);
  CHECK(tr.states.size() == 21);
  for (const auto& s : tr.states) CHECK(s == x0);

  const BCFieldModel off_map(64, 64, std::vector<Vec2>(64 * 64, Vec2{0, 100}));
  const auto fr = bc_rollout(off_map, sc, x0, 20);
  CHECK(fr.frozen);
  CHECK(fr.final_state() == x0);
}

TEST_CASE("rrt star on an empty map is near straight") {
  GridMap m(64, 64);
  RRTStarConfig c;
  c.seed = 3;
  const auto r = rrt_star(m, {5, 5}, {55, 55}, c);
  REQUIRE(r.success);
  CHECK(r.path.front() == State{5, 5});
  CHECK(r.path.back() == State{55, 55});
  CHECK(path_length(r.path) <= 1.05 * std::hypot(50.0, 50.0));
  CHECK(r.cost == doctest::Approx(path_length(r.path)));
  const auto j = nlohmann::json::parse(rrt_tree_json(r));
  CHECK(j["nodes"].size() == r.tree.size());
}

TEST_CASE("rrt star fails inside a sealed ring and rejects bad endpoints") {
  GridMap m(32, 32);
  for (int d = -3; d <= 3; ++d) {
    m.set_obstacle({20 + d, 17}, true);
    m.set_obstacle({20 + d, 23}, true);
    m.set_obstacle({17, 20 + d}, true);
    m.set_obstacle({23, 20 + d}, true);
  }
  RRTStarConfig c;
  c.max_iterations = 1500;
  const auto r = rrt_star(m, {3, 3}, {20, 20}, c);
  CHECK_FALSE(r.success);
  CHECK(r.iterations == 1500);
  CHECK_THROWS_AS(rrt_star(m, {17, 20}, {3, 3}, c), InvalidArgument);
}

TEST_CASE("rrt star paths are collision free and improve with iterations") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sc = grid::generate_scenario(grid::MapGenConfig{}, seed);
    const State start = center_of(sc.initial_region.cells().front());
    const State goal = center_of(sc.goals[0].cell);
    double prev = std::numeric_limits<double>::infinity();
    for (int iters : {1000, 2000, 4000}) {
      RRTStarConfig c;
      c.seed = seed;
      c.max_iterations = iters;
      const auto r = rrt_star(sc.map, start, goal, c);
      if (!r.success) continue;
      CHECK(dense_samples_free(sc.map, r.path));
      CHECK(r.cost <= prev + 1e-9);
      prev = r.cost;
    }
    CHECK(std::isfinite(prev));
  }
}

TEST_CASE("segment check catches diagonal slips") {
  GridMap m(6, 6);
  m.set_obstacle({2, 2}, true);
  m.set_obstacle({3, 3}, true);
  CHECK_FALSE(segment_free(m, {2, 3}, {3, 2}));
  CHECK(segment_free(m, {0, 0}, {5, 0}));
  CHECK_FALSE(segment_free(m, {0, 2}, {5, 2}));
}

TEST_CASE("gaussian baseline matches the primary sampler without obstacles") {
  grid::Scenario sc{GridMap(64, 64), {{{32, 12}, true}}, {29, 50, 6, 6}, 0};
  KernelSchedule sched;
  sampler::SamplerConfig cfg;
  const auto prov = sampler::gaussian_provider(sc, sched);
  double mx_a = 0, my_a = 0, mx_b = 0, my_b = 0;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = hash64(77, i);
    const State x0 = eval::initial_state(sc, seed);
    const auto a = gaussian_diffusion_sample(sc, sched, cfg, x0, seed);
    const auto b = sampler::sample_trajectory(sc, *prov, x0, sched, cfg, seed);
    mx_a += a.final_state().x;
    my_a += a.final_state().y;
    mx_b += b.final_state().x;
    my_b += b.final_state().y;
  }
  CHECK(std::abs(mx_a - mx_b) / n <= 0.2);
  CHECK(std::abs(my_a - my_b) / n <= 0.2);
}

TEST_CASE("gaussian baseline freezes on obstructed maps") {
  const auto sc = grid::generate_scenario(grid::MapGenConfig{}, 5);
  KernelSchedule sched;
  sampler::SamplerConfig cfg;
  int frozen = 0;
  for (int i = 0; i < 50; ++i) {
    const std::uint64_t seed = hash64(5, i);
    const auto tr = gaussian_diffusion_sample(sc, sched, cfg, eval::initial_state(sc, seed), seed);
    frozen += tr.frozen;
    for (const auto& s : tr.states) REQUIRE(sc.map.state_is_free(s));
  }
  CHECK(frozen > 0);
}

TEST_CASE("gaussian baseline is drawn to the unreachable goal about half the time") {
  grid::MapGenConfig mc;
  mc.scenario_kind = grid::ScenarioKind::kUnreachable;
  KernelSchedule sched;
  sampler::SamplerConfig cfg;
  int toward_blocked = 0, counted = 0;
  for (std::uint64_t ep = 0; ep < 10; ++ep) {
    const auto sc = grid::generate_scenario(mc, ep);
    const auto& blocked = sc.goals[0].reachable ? sc.goals[1] : sc.goals[0];
    const auto& open = sc.goals[0].reachable ? sc.goals[0] : sc.goals[1];
    const grid::Scenario cleared{sc.map.cleared(), sc.goals, sc.initial_region, sc.seed};
    for (int i = 0; i < 40; ++i) {
      const std::uint64_t seed = hash64(ep, i);
      const auto tr = gaussian_diffusion_sample(cleared, sched, cfg, eval::initial_state(sc, seed), seed);
      if (tr.frozen) continue;
      // State at the middle of the run, split by the perpendicular bisector of the goals.
      const State mid = tr.states[tr.states.size() / 2];
      const double db = (mid - center_of(blocked.cell)).norm(), dr = (mid - center_of(open.cell)).norm();
      toward_blocked += db < dr;
      ++counted;
    }
  }
  const double share = static_cast<double>(toward_blocked) / counted;
  CHECK(share >= 0.3);
  CHECK(share <= 0.7);
}

TEST_CASE("gaussian plus rrt reaches reachable goals and freezes on blocked ones") {
  const auto sc = grid::generate_scenario(grid::MapGenConfig{}, 9);
  KernelSchedule sched;
  sampler::SamplerConfig cfg;
  RRTStarConfig rrt;
  rrt.stop_at_first_solution = true;
  int hits = 0;
  for (int i = 0; i < 20; ++i) {
    const std::uint64_t seed = hash64(9, i);
    const State x0 = eval::initial_state(sc, seed);
    const auto tr = gaussian_plus_rrt(sc, sched, cfg, rrt, x0, seed);
    CHECK(tr.states.front() == x0);
    if (!tr.frozen) CHECK(dense_samples_free(sc.map, tr.states));
    hits += (tr.final_state() - center_of(sc.goals[0].cell)).norm() <= 3.0;
  }
  CHECK(hits >= 18);
}
