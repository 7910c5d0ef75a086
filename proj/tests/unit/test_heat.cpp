#include <cmath>

#include "doctest.h"
#include "heatplan/gridmap.hpp"
#include "heatplan/heat.hpp"

using namespace heatplan;
using namespace heatplan::heat;
using grid::GridMap;

namespace {

// Direct transcription of the masked update, cell by cell, with bounds checks.
std::vector<double> oracle_step(const std::vector<double>& u, const GridMap& m, double c) {
  std::vector<double> next(u.size(), 0.0);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (!m.is_free({x, y})) continue;
      double sum = 0.0;
      int valid = 0;
      const Cell nb[4] = {{x, y - 1}, {x, y + 1}, {x + 1, y}, {x - 1, y}};
      for (const Cell& n : nb)
        if (m.is_free(n)) {
          sum += u[m.index(n)];
          ++valid;
        }
      const double v = u[m.index({x, y})];
      next[m.index({x, y})] = v + c * (sum - valid * v);
    }
  return next;
}

GridMap random_map(int w, int h, std::uint64_t seed, double density) {
  GridMap m(w, h);
  Rng rng(seed);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set_obstacle({x, y}, rng.bernoulli(density));
  return m;
}

HeatField random_field(const GridMap& m, std::uint64_t seed) {
  HeatField f(m.width(), m.height());
  Rng rng(seed);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.is_free({x, y})) f.at({x, y}) = rng.uniform();
  return f;
}

}  // namespace

TEST_CASE("dispersion time to step count") {
  CHECK(steps_for_dispersion_time(12.5) == 50);
  CHECK(steps_for_dispersion_time(3612.5) == 14450);
  CHECK(steps_for_dispersion_time(0.0) == 0);
  CHECK_THROWS_AS(steps_for_dispersion_time(-1.0), InvalidArgument);
}

TEST_CASE("solver params validation") {
  SolverParams p;
  p.coeff = 0.3;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p.coeff = 0.0;
  CHECK_THROWS(p.validate());
  p = {};
  p.dk = 0.0;
  CHECK_THROWS(p.validate());
}

TEST_CASE("one hand-applied step on 3x3") {
  GridMap m(4, 4);
  // Block the last row and column so the free region is 3x3.
  for (int i = 0; i < 4; ++i) {
    m.set_obstacle({3, i}, true);
    m.set_obstacle({i, 3}, true);
  }
  const auto out = evolve(HeatField::delta(4, 4, {1, 1}), m, 1);
  CHECK(out.at({1, 1}) == 0.0);
  CHECK(out.at({0, 1}) == 0.25);
  CHECK(out.at({2, 1}) == 0.25);
  CHECK(out.at({1, 0}) == 0.25);
  CHECK(out.at({1, 2}) == 0.25);
  CHECK(out.at({0, 0}) == 0.0);
  CHECK(out.at({2, 2}) == 0.0);
  CHECK(out.total_mass() == 1.0);
}

TEST_CASE("uniform field is an equilibrium") {
  GridMap m(9, 6);
  HeatField f(9, 6, std::vector<double>(54, 0.125));
  const auto out = evolve(f, m, 200);
  for (double v : out.values()) CHECK(v == 0.125);
}

TEST_CASE("enclosed cell is perfectly insulated") {
  GridMap m(5, 5);
  for (int i = 0; i < 5; ++i) {
    m.set_obstacle({i, 1}, true);
    m.set_obstacle({i, 3}, true);
    m.set_obstacle({1, i}, true);
    m.set_obstacle({3, i}, true);
  }
  const auto out = evolve(HeatField::delta(5, 5, {2, 2}, 3.5), m, 500);
  CHECK(out.at({2, 2}) == 3.5);
}

TEST_CASE("zero steps returns the input") {
  const auto m = random_map(12, 9, 1, 0.2);
  const auto f = random_field(m, 2);
  const auto out = evolve(f, m, 0);
  CHECK(std::equal(out.values().begin(), out.values().end(), f.values().begin()));
}

TEST_CASE("errors on bad input") {
  GridMap m(6, 6);
  CHECK_THROWS_AS(evolve(HeatField(6, 5), m, 1), InvalidArgument);
  CHECK_THROWS_AS(evolve(HeatField(6, 6), m, -1), InvalidArgument);
  m.set_obstacle({2, 2}, true);
  CHECK_THROWS_AS(evolve(HeatField::delta(6, 6, {2, 2}), m, 1), InvalidArgument);
  HeatField neg(6, 6);
  neg.at({0, 0}) = -1.0;
  CHECK_THROWS_AS(evolve(neg, m, 1), InvalidArgument);
}

TEST_CASE("matches the per-cell oracle on random maps") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = random_map(13, 11, seed, 0.25);
    auto f = random_field(m, seed + 100);
    std::vector<double> ref(f.values().begin(), f.values().end());
    for (int s = 0; s < 30; ++s) ref = oracle_step(ref, m, 0.25);
    const auto out = evolve(f, m, 30);
    for (std::size_t i = 0; i < ref.size(); ++i) REQUIRE(out.values()[i] == doctest::Approx(ref[i]).epsilon(1e-13));
  }
}

TEST_CASE("mass conservation, non-negativity and obstacle zeros") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = random_map(32, 32, seed, 0.2);
    const auto f = random_field(m, seed);
    const auto out = evolve(f, m, 2000);
    CHECK(std::abs(out.total_mass() - f.total_mass()) / f.total_mass() <= 1e-9);
    CHECK(satisfies_invariants(out, m));
  }
}

TEST_CASE("linearity") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = random_map(16, 16, seed, 0.2);
    const auto u1 = random_field(m, seed * 2 + 1);
    const auto u2 = random_field(m, seed * 2 + 2);
    const double a = 0.7, b = 2.3;
    HeatField mix(16, 16);
    for (std::size_t i = 0; i < mix.size(); ++i) mix.values()[i] = a * u1.values()[i] + b * u2.values()[i];
    const auto lhs = evolve(mix, m, 300);
    const auto r1 = evolve(u1, m, 300);
    const auto r2 = evolve(u2, m, 300);
    double worst = 0.0;
    for (std::size_t i = 0; i < mix.size(); ++i)
      worst = std::max(worst, std::abs(lhs.values()[i] - (a * r1.values()[i] + b * r2.values()[i])));
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("left-right symmetry") {
  const int w = 15, h = 10;
  GridMap m(w, h);
  Rng rng(5);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x <= w / 2; ++x) {
      const bool ob = rng.bernoulli(0.2) && x != w / 2;
      m.set_obstacle({x, y}, ob);
      m.set_obstacle({w - 1 - x, y}, ob);
    }
  HeatField f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x <= w / 2; ++x)
      if (m.is_free({x, y})) f.at({x, y}) = f.at({w - 1 - x, y}) = rng.uniform();
  const auto out = evolve(f, m, 400);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) CHECK(out.at({x, y}) == doctest::Approx(out.at({w - 1 - x, y})).epsilon(1e-12));
}

TEST_CASE("free-space variance equals 2k") {
  GridMap m(64, 64);
  for (double k : {5.0, 12.5, 25.0, 50.0}) {
    const auto out = evolve(HeatField::delta(64, 64, {32, 32}), m, steps_for_dispersion_time(k));
    double var = 0.0;
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) var += out.at({x, y}) * ((x - 32.0) * (x - 32.0));
    CHECK(std::abs(var - 2.0 * k) <= 0.05 * 2.0 * k);
  }
}

TEST_CASE("standard update leaks mass where the revised one does not") {
  // Standard stencil: obstacle neighbours contribute zero but V stays 4.
  GridMap m(8, 8);
  for (int y = 0; y < 8; ++y) m.set_obstacle({4, y}, y != 3);
  HeatField f = HeatField::delta(8, 8, {2, 3});
  std::vector<double> u(f.values().begin(), f.values().end());
  for (int s = 0; s < 50; ++s) {
    std::vector<double> next(u.size(), 0.0);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) {
        if (!m.is_free({x, y})) continue;
        double sum = 0.0;
        const Cell nb[4] = {{x, y - 1}, {x, y + 1}, {x + 1, y}, {x - 1, y}};
        for (const Cell& n : nb)
          if (m.is_free(n)) sum += u[m.index(n)];
        next[m.index({x, y})] = u[m.index({x, y})] + 0.25 * (sum - 4.0 * u[m.index({x, y})]);
      }
    u = next;
  }
  double standard_mass = 0.0;
  for (double v : u) standard_mass += v;
  CHECK(standard_mass < 0.99);
  CHECK(evolve(f, m, 50).total_mass() == doctest::Approx(1.0).epsilon(1e-14));
}
