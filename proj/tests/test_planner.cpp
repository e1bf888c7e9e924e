#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "navlab/planner.hpp"
#include "oracles.hpp"
#include "test_maps.hpp"

using namespace navlab;

namespace {

void check_path_shape(const Plan& p, Cell start, Cell goal) {
  REQUIRE_FALSE(p.waypoints.empty());
  CHECK(p.waypoints.front() == start);
  CHECK(p.waypoints.back() == goal);
  for (std::size_t i = 1; i < p.waypoints.size(); ++i) CHECK(chebyshev(p.waypoints[i - 1], p.waypoints[i]) == 1);
}

}  // namespace

TEST_CASE("edge weight rule") {
  CHECK(edge_weight(0.0, false) == 1.0);
  CHECK(edge_weight(0.0, true) == 1.4);
  CHECK(edge_weight(0.5, true) == doctest::Approx(1001.4));
}

TEST_CASE("weighted_astar examples") {
  SUBCASE("empty 5x5 grid goes straight down the diagonal") {
    const Grid<double> s(5, 5, 0.0);
    const Plan p = weighted_astar(s, {0, 0}, {4, 4});
    check_path_shape(p, {0, 0}, {4, 4});
    CHECK(p.waypoints.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(p.waypoints[i] == Cell{i, i});
    CHECK(p.cost == doctest::Approx(5.6));
    CHECK(p.cost == doctest::Approx(oracle::dijkstra(s, {0, 0})[Cell{4, 4}]));
  }
  SUBCASE("start equals goal") {
    const Plan p = weighted_astar(Grid<double>(3, 3, 0.0), {1, 2}, {1, 2});
    CHECK(p.waypoints == std::vector<Cell>{{1, 2}});
    CHECK(p.cost == 0.0);
  }
  SUBCASE("a high-score corridor cell is detoured") {
    Grid<double> s(3, 3, 0.0);
    s[Cell{1, 1}] = 1.0;
    const Plan p = weighted_astar(s, {0, 1}, {2, 1});
    check_path_shape(p, {0, 1}, {2, 1});
    CHECK(p.waypoints.size() == 3);
    CHECK_FALSE(p.waypoints[1] == Cell{1, 1});
    CHECK(p.cost == doctest::Approx(2.8));
    CHECK(p.cost == doctest::Approx(oracle::dijkstra(s, {0, 1})[Cell{2, 1}]));
  }
  SUBCASE("masked goal component has no path") {
    Grid<std::uint8_t> mask(5, 5, 0);
    for (int y = 0; y < 5; ++y) mask[Cell{2, y}] = 1;
    PlanOptions opt;
    opt.blocked = &mask;
    try {
      (void)weighted_astar(Grid<double>(5, 5, 0.0), {0, 0}, {4, 4}, opt);
      FAIL("expected NoPath");
    } catch (const NavError& e) {
      CHECK(e.code() == ErrorCode::NoPath);
    }
  }
  SUBCASE("no corner cutting between two masked cells") {
    Grid<std::uint8_t> mask(3, 3, 0);
    mask[Cell{1, 0}] = 1;
    mask[Cell{0, 1}] = 1;
    PlanOptions opt;
    opt.blocked = &mask;
    CHECK(weighted_astar(Grid<double>(3, 3, 0.0), {0, 0}, {2, 2}, opt).waypoints.size() == 3);
    opt.allow_corner_cutting = false;
    CHECK_THROWS_AS(weighted_astar(Grid<double>(3, 3, 0.0), {0, 0}, {2, 2}, opt), NavError);
  }
}

TEST_CASE("property: weighted_astar cost equals Dijkstra") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> c(0, 29);
  for (int trial = 0; trial < 25; ++trial) {
    const Grid<double> s = testmaps::random_scores(30, 30, 0.3, rng);
    const Cell a{c(rng), c(rng)}, b{c(rng), c(rng)};
    const Plan p = weighted_astar(s, a, b);
    check_path_shape(p, a, b);
    CHECK(p.cost == oracle::dijkstra(s, a)[b]);
    CHECK(path_cost(s, p.waypoints) == doctest::Approx(p.cost));
  }
}

TEST_CASE("property: raising a score never lowers the optimal cost") {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<int> c(0, 19);
  std::uniform_real_distribution<double> up(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    Grid<double> s = testmaps::random_scores(20, 20, 0.2, rng);
    const Cell a{c(rng), c(rng)}, b{c(rng), c(rng)};
    const double before = weighted_astar(s, a, b).cost;
    const Cell bump{c(rng), c(rng)};
    s[bump] = std::min(1.0, s[bump] + up(rng));
    CHECK(weighted_astar(s, a, b).cost >= before);
  }
}

TEST_CASE("property: plans are deterministic") {
  std::mt19937_64 rng(33);
  const Grid<double> s = testmaps::random_scores(40, 40, 0.0, rng);
  const Plan a = weighted_astar(s, {0, 0}, {39, 20});
  const Plan b = weighted_astar(s, {0, 0}, {39, 20});
  CHECK(a.waypoints == b.waypoints);
  CHECK(a.cost == b.cost);
}

TEST_CASE("directional_astar honours the axis of a blocked entry") {
  DirectionalTraversal t(3, 3);
  const Grid<double> s(3, 3, 0.0);
  CHECK(directional_astar(t, s, {1, 0}, {1, 1}).cost == 1.0);
  t.vertical[Cell{1, 1}] = 1;
  const Plan p = directional_astar(t, s, {1, 0}, {1, 1});
  CHECK(p.cost == doctest::Approx(3.0));
  CHECK(p.waypoints.size() == 4);
  for (std::size_t i = 1; i < p.waypoints.size(); ++i) CHECK(manhattan(p.waypoints[i - 1], p.waypoints[i]) == 1);
}

TEST_CASE("select_subgoal") {
  const GridGeometry g{10, 10, 0.1, {}};
  SUBCASE("clear corridor picks the last waypoint") {
    OccupancyBelief b(g);
    std::vector<Cell> wp;
    for (int x = 1; x <= 8; ++x) wp.push_back({x, 5});
    const Vec2 c = g.center_of({1, 5});
    CHECK(select_subgoal(wp, b, Pose2D(c.x, c.y, 0), WorldMode::Continuous) == Cell{8, 5});
  }
  SUBCASE("L-shaped path around a block picks the corner") {
    OccupancyBelief b(g);
    for (int y = 3; y <= 8; ++y) {
      for (int x = 3; x <= 8; ++x) b.scores[Cell{x, y}] = 1.0;
    }
    std::vector<Cell> wp;
    for (int x = 1; x <= 8; ++x) wp.push_back({x, 2});
    for (int y = 3; y <= 9; ++y) wp.push_back({9, y});
    wp.insert(wp.begin() + 8, Cell{9, 2});
    const Vec2 c = g.center_of({1, 2});
    CHECK(select_subgoal(wp, b, Pose2D(c.x, c.y, 0), WorldMode::Continuous) == Cell{9, 2});
  }
  SUBCASE("discrete mode takes the next waypoint") {
    OccupancyBelief b(g);
    const std::vector<Cell> wp{{1, 1}, {2, 1}, {3, 1}};
    CHECK(select_subgoal(wp, b, Pose2D(0.15, 0.15, 0), WorldMode::Discrete) == Cell{2, 1});
  }
  SUBCASE("nothing in sight falls back to the first step") {
    OccupancyBelief b(g);
    b.scores[Cell{2, 1}] = 1.0;
    b.scores[Cell{2, 2}] = 1.0;
    const std::vector<Cell> wp{{1, 1}, {2, 1}, {3, 1}};
    CHECK(select_subgoal(wp, b, Pose2D(0.15, 0.15, 0), WorldMode::Continuous) == Cell{2, 1});
  }
}

TEST_CASE("property: the chosen subgoal is in sight and nothing later is") {
  std::mt19937_64 rng(34);
  std::uniform_int_distribution<int> c(0, 29);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    OccupancyBelief b(GridGeometry{30, 30, 0.1, {}});
    b.scores = testmaps::random_scores(30, 30, 0.15, rng);
    const Cell a{c(rng), c(rng)}, goal{c(rng), c(rng)};
    const Plan p = weighted_astar(b.scores, a, goal);
    if (p.waypoints.size() < 2) continue;
    const Vec2 at = b.geometry.center_of(a);
    const Cell sub = select_subgoal(p.waypoints, b, Pose2D(at.x, at.y, 0), WorldMode::Continuous);
    auto clear = [&](Cell to) {
      for (int y = 0; y < 30; ++y) {
        for (int x = 0; x < 30; ++x) {
          const Cell k{x, y};
          if (k == a || b.scores[k] < kLineOfSightBlock) continue;
          if (oracle::segment_touches_cell(a, to, k)) return false;
        }
      }
      return true;
    };
    const auto pos = std::find(p.waypoints.begin(), p.waypoints.end(), sub);
    REQUIRE(pos != p.waypoints.end());
    bool any_clear = false;
    for (auto it = p.waypoints.begin() + 1; it != p.waypoints.end(); ++it) any_clear = any_clear || clear(*it);
    if (any_clear) {
      CHECK(clear(sub));
      ++checked;
    } else {
      CHECK(sub == p.waypoints[1]);
    }
    for (auto it = pos + 1; it != p.waypoints.end(); ++it) CHECK_FALSE(clear(*it));
    CHECK(line_of_sight(b, at, b.geometry.center_of(sub)) == clear(sub));
  }
  CHECK(checked > 20);
}

TEST_CASE("next_action") {
  const ControlConfig cfg = ControlConfig::for_space(ActionSpace::continuous());
  CHECK(cfg.angle_threshold == doctest::Approx(3.6 * std::numbers::pi / 180));
  const Pose2D p(0, 0, 0);
  CHECK(next_action(p, {1, 0}, cfg) == Action::Forward);
  CHECK(next_action(p, {0, 1}, cfg) == Action::RotateLeft);
  const double b = -10 * std::numbers::pi / 180;
  CHECK(next_action(p, {std::cos(b), std::sin(b)}, cfg) == Action::RotateRight);
  const double inside = 3.5 * std::numbers::pi / 180;
  CHECK(next_action(p, {std::cos(inside), std::sin(inside)}, cfg) == Action::Forward);
}
