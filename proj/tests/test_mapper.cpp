#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "navlab/mapper.hpp"
#include "test_maps.hpp"

using namespace navlab;

namespace {

RangeScan one_ray(double range) {
  RangeScan s;
  s.ranges = {range};
  s.bearings = {0.0};
  s.max_range = 4.0;
  return s;
}

ClassifiedPoints single(Vec2 p, double d, bool obstacle) {
  ClassifiedPoints pts;
  (obstacle ? pts.obstacle : pts.free).push_back({p, d});
  return pts;
}

}  // namespace

TEST_CASE("classify_scan") {
  const GridGeometry g{50, 50, 0.2, {}};
  SUBCASE("one finite ray") {
    const ClassifiedPoints c = classify_scan(one_ray(1.0), Pose2D(1.0, 1.0, 0.0), g);
    REQUIRE(c.obstacle.size() == 1);
    CHECK(c.obstacle[0].distance == 1.0);
    CHECK(c.obstacle[0].point.x == doctest::Approx(2.0));
    REQUIRE(c.free.size() == 9);
    for (std::size_t i = 0; i < c.free.size(); ++i) {
      CHECK(c.free[i].distance == doctest::Approx(0.1 * (i + 1)));
      CHECK(c.free[i].point.x == doctest::Approx(1.0 + 0.1 * (i + 1)));
      CHECK(c.free[i].point.y == doctest::Approx(1.0));
    }
  }
  SUBCASE("max-range ray contributes only free points") {
    const ClassifiedPoints c =
        classify_scan(one_ray(std::numeric_limits<double>::infinity()), Pose2D(1.0, 1.0, 0.0), g);
    CHECK(c.obstacle.empty());
    CHECK(c.free.size() == 39);
  }
  SUBCASE("points outside the map are dropped") {
    const ClassifiedPoints c = classify_scan(one_ray(1.0), Pose2D(9.5, 1.0, 0.0), g);
    CHECK(c.obstacle.empty());
    CHECK(c.free.size() == 4);
  }
  SUBCASE("rays are rotated into the map frame") {
    const ClassifiedPoints c = classify_scan(one_ray(1.0), Pose2D(1.0, 1.0, std::numbers::pi / 2), g);
    CHECK(c.obstacle[0].point.x == doctest::Approx(1.0));
    CHECK(c.obstacle[0].point.y == doctest::Approx(2.0));
  }
}

TEST_CASE("update_analytic examples") {
  const GridGeometry g{10, 10, 0.1, {}};
  const Vec2 p = g.center_of({5, 5});
  SUBCASE("free point discounts by 0.9") {
    OccupancyBelief b(g);
    b.scores[{5, 5}] = 0.9;
    update_analytic(b, single(p, 1.0, false));
    CHECK(b.score({5, 5}) == doctest::Approx(0.81));
  }
  SUBCASE("obstacle at 1 m adds 0.5 and spreads a tenth of it") {
    OccupancyBelief b(g);
    update_analytic(b, single(p, 1.0, true));
    CHECK(b.score({5, 5}) == doctest::Approx(0.5));
    for (Cell d : kDirections8) CHECK(b.score(Cell{5, 5} + d) == doctest::Approx(0.1 * 0.5 / 8));
    CHECK(b.score({7, 5}) == 0.0);
  }
  SUBCASE("close obstacle clamps at 1") {
    OccupancyBelief b(g);
    update_analytic(b, single(p, 0.25, true));
    CHECK(b.score({5, 5}) == 1.0);
  }
  SUBCASE("free first, then obstacles, then spreading") {
    OccupancyBelief b(g);
    b.scores[{5, 5}] = 0.4;
    ClassifiedPoints pts;
    pts.free.push_back({p, 0.5});
    pts.obstacle.push_back({p, 2.0});
    update_analytic(b, pts);
    const double free_first = 0.4 * 0.9 + 0.25;
    const double obstacle_first = (0.4 + 0.25) * 0.9;
    CHECK(b.score({5, 5}) == doctest::Approx(free_first));
    CHECK(free_first != doctest::Approx(obstacle_first));
  }
  SUBCASE("disjoint cells do not depend on point order") {
    ClassifiedPoints a, r;
    a.free.push_back({g.center_of({1, 1}), 1.0});
    a.obstacle.push_back({g.center_of({8, 8}), 1.0});
    a.obstacle.push_back({g.center_of({4, 1}), 2.0});
    r.free = a.free;
    r.obstacle = {a.obstacle[1], a.obstacle[0]};
    OccupancyBelief x(g), y(g);
    x.scores[{1, 1}] = y.scores[{1, 1}] = 0.6;
    update_analytic(x, a);
    update_analytic(y, r);
    CHECK(x.scores == y.scores);
  }
}

TEST_CASE("spread_obstacle_increments keeps the neighbour share at the edge") {
  Grid<double> scores(3, 3, 0.0), inc(3, 3, 0.0);
  inc[{0, 0}] = 0.8;
  spread_obstacle_increments(scores, inc, 0.1);
  CHECK(scores[Cell{0, 0}] == doctest::Approx(0.8));
  CHECK(scores[Cell{1, 1}] == doctest::Approx(0.01));
  CHECK(scores[Cell{2, 2}] == 0.0);
}

TEST_CASE("detect_collision") {
  const ActionSpace cs = ActionSpace::continuous();
  const GridGeometry g{40, 40, 0.1, {}};
  const Pose2D pose(1.05, 1.05, 0.0);
  const auto hit = detect_collision(Action::Forward, RigidTransform2D(0.03, 0, 0), pose, cs, g);
  REQUIRE(hit);
  CHECK(*hit == Cell{12, 10});
  CHECK_FALSE(detect_collision(Action::Forward, RigidTransform2D(0.15, 0, 0), pose, cs, g));
  CHECK_FALSE(detect_collision(Action::RotateLeft, RigidTransform2D(0, 0, 0), pose, cs, g));
  CHECK_FALSE(detect_collision(Action::RotateRight, RigidTransform2D(), pose, cs, g));

  const ActionSpace ds = ActionSpace::discrete();
  const GridGeometry dg{6, 6, 0.8, {}};
  const Pose2D north(dg.center_of({2, 2}).x, dg.center_of({2, 2}).y, std::numbers::pi / 2);
  const auto blocked = detect_collision(Action::Forward, RigidTransform2D(), north, ds, dg);
  REQUIRE(blocked);
  CHECK(*blocked == Cell{2, 3});
  CHECK_FALSE(detect_collision(Action::Forward, RigidTransform2D(0.8, 0, 0), north, ds, dg));
}

TEST_CASE("update_collision kernel") {
  OccupancyBelief b(GridGeometry{9, 9, 0.1, {}});
  b.scores[{5, 4}] = 0.8;
  b.scores[{4, 4}] = 0.3;
  update_collision(b, {4, 4});
  CHECK(b.score({4, 4}) == 1.0);
  CHECK(b.score({4, 5}) == 0.5);
  CHECK(b.score({5, 4}) == 0.8);
  CHECK(b.score({3, 3}) == 0.25);
  CHECK(b.score({6, 6}) == 0.1);
  CHECK(b.score({2, 5}) == 0.1);
  CHECK(b.score({7, 4}) == 0.0);
  CHECK_THROWS_AS(update_collision(b, {9, 0}), NavError);
  update_collision(b, {0, 0});
  CHECK(b.score({0, 0}) == 1.0);
}

TEST_CASE("update_traversal") {
  DirectionalTraversal t(5, 5);
  update_traversal(t, {2, 2}, {2, 3}, true);
  CHECK(t.vertical[Cell{2, 3}] == 1);
  CHECK(t.horizontal == Grid<std::uint8_t>(5, 5, 0));
  update_traversal(t, {2, 2}, {3, 2}, false);
  CHECK(t.horizontal[Cell{3, 2}] == 0);
  update_traversal(t, {4, 2}, {3, 2}, true);
  CHECK(t.horizontal[Cell{3, 2}] == 1);
  update_traversal(t, {2, 2}, {3, 2}, false);
  CHECK(t.horizontal[Cell{3, 2}] == 0);
  try {
    update_traversal(t, {2, 2}, {3, 3}, true);
    FAIL("expected InvalidMove");
  } catch (const NavError& e) {
    CHECK(e.code() == ErrorCode::InvalidMove);
  }
}

TEST_CASE("property: scores stay in [0,1] under any update sequence") {
  std::mt19937_64 rng(5);
  const GridGeometry g{20, 20, 0.1, {}};
  OccupancyBelief b(g);
  std::uniform_real_distribution<double> u(-0.2, 2.2), d(0.01, 3.0);
  std::uniform_int_distribution<int> cell(0, 19), kind(0, 2), n(0, 40);
  for (int step = 0; step < 400; ++step) {
    switch (kind(rng)) {
      case 0:
        update_collision(b, {cell(rng), cell(rng)});
        break;
      default: {
        ClassifiedPoints pts;
        for (int i = n(rng); i > 0; --i) pts.free.push_back({{u(rng), u(rng)}, d(rng)});
        for (int i = n(rng); i > 0; --i) pts.obstacle.push_back({{u(rng), u(rng)}, d(rng)});
        update_analytic(b, pts);
      }
    }
    for (double s : b.scores.raw()) REQUIRE((s >= 0.0 && s <= 1.0));
  }
}

TEST_CASE("property: mapping fidelity with ground-truth poses") {
  std::mt19937_64 rng(6);
  std::vector<std::string> rows = {
      "##############################",
      "#............................#",
      "#............................#",
      "#.....XXX....................#",
      "#.....XXX..........XXXX......#",
      "#..................XXXX......#",
      "#............................#",
      "#............................#",
      "#.........XX.................#",
      "#.........XX.................#",
      "#............................#",
      "#............................#",
      "#.....................XX.....#",
      "#............................#",
      "#............................#",
      "#............................#",
      "#............................#",
      "#............................#",
      "#............................#",
      "##############################",
  };
  const GroundTruthMap map = GroundTruthMap::from_ascii(rows, 0.1);
  OccupancyBelief b(map.geometry());
  const SensorConfig sensor;
  std::set<Cell> seen;
  int endpoints = 0, grazing = 0;
  std::uniform_real_distribution<double> ux(0.1, 2.9), uy(0.1, 1.9), uh(0, 2 * std::numbers::pi);
  int scans = 0;
  while (scans < 200) {
    const Pose2D p(ux(rng), uy(rng), uh(rng));
    if (!map.is_free(map.cell_of(p.position()))) continue;
    ++scans;
    const RangeScan s = raycast_scan(map, p, sensor, 0.2, rng);
    const ClassifiedPoints pts = classify_scan(s, p, b.geometry);
    for (const ObservedPoint& o : pts.obstacle) {
      ++endpoints;
      const Cell c = map.cell_of(o.point);
      if (map.is_obstacle(c)) {
        seen.insert(c);
      } else {
        ++grazing;  // ray ended exactly on a block corner
      }
    }
    update_analytic(b, pts);
  }
  int inter = 0, predicted = 0;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const Cell c{x, y};
      if (b.score(c) < 0.5) continue;
      ++predicted;
      inter += seen.count(c) ? 1 : 0;
    }
  }
  CHECK(grazing * 1000 <= endpoints);
  const double recall = static_cast<double>(inter) / seen.size();
  const double iou = static_cast<double>(inter) / (predicted + seen.size() - inter);
  CHECK(recall >= 0.95);
  CHECK(iou >= 0.8);
}
