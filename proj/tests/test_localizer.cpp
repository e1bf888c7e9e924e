#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "navlab/kdtree.hpp"
#include "navlab/localizer.hpp"
#include "navlab/mapgen.hpp"
#include "test_maps.hpp"

using namespace navlab;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<Vec2> room_cloud() {
  const GroundTruthMap map = testmaps::room(40, 30, 0.1);
  SensorConfig cfg;
  cfg.fov = 2 * std::numbers::pi * 0.9;
  cfg.ray_count = 240;
  Rng rng(1);
  return raycast_scan(map, Pose2D(1.3, 1.1, 0.2), cfg, 0.2, rng).points();
}

Trajectory forward_log(const std::vector<double>& tx) {
  Trajectory t;
  for (double v : tx) {
    StepRecord s;
    s.action = Action::Forward;
    s.achieved = RigidTransform2D(v, 0.0, 0.0);
    t.steps.push_back(s);
  }
  return t;
}

}  // namespace

TEST_CASE("icp_align on identical clouds is the identity") {
  const std::vector<Vec2> cloud = room_cloud();
  for (IcpVariant v : {IcpVariant::PointToPoint, IcpVariant::PointToPlane}) {
    IcpConfig cfg;
    cfg.variant = v;
    const IcpResult r = icp_align(cloud, cloud, RigidTransform2D::identity(), cfg);
    CHECK(r.residual <= 1e-9);
    CHECK(std::abs(r.transform.tx) <= 1e-9);
    CHECK(std::abs(r.transform.ty) <= 1e-9);
    CHECK(std::abs(r.transform.dtheta) <= 1e-9);
  }
}

TEST_CASE("icp_align recovers a 7.2 degree rotation about the sensor") {
  const std::vector<Vec2> ref = room_cloud();
  const RigidTransform2D truth(0.0, 0.0, 7.2 * kDeg);
  std::vector<Vec2> cur;
  for (Vec2 p : ref) cur.push_back(truth.inverse().apply(p));
  for (IcpVariant v : {IcpVariant::PointToPoint, IcpVariant::PointToPlane}) {
    IcpConfig cfg;
    cfg.variant = v;
    const IcpResult r = icp_align(ref, cur, RigidTransform2D::identity(), cfg);
    CHECK(std::abs(r.transform.dtheta - truth.dtheta) <= 0.5 * kDeg);
    CHECK(r.transform.translation_norm() <= 0.01);
  }
}

TEST_CASE("icp_align rejects degenerate clouds") {
  const std::vector<Vec2> two{{0, 0}, {1, 0}};
  const std::vector<Vec2> many = room_cloud();
  IcpConfig cfg;
  try {
    (void)icp_align(two, many, RigidTransform2D::identity(), cfg);
    FAIL("expected DegenerateCloud");
  } catch (const NavError& e) {
    CHECK(e.code() == ErrorCode::DegenerateCloud);
  }
  std::vector<Vec2> far;
  for (Vec2 p : many) far.push_back(p + Vec2{100.0, 100.0});
  try {
    (void)icp_align(many, far, RigidTransform2D::identity(), cfg);
    FAIL("expected NoCorrespondence");
  } catch (const NavError& e) {
    CHECK(e.code() == ErrorCode::NoCorrespondence);
  }
}

TEST_CASE("action priors") {
  const ActionSpace space = ActionSpace::continuous();
  SUBCASE("median of forward displacements") {
    const std::vector<Trajectory> logs{forward_log({0.18, 0.20, 0.20})};
    const ActionPriorTable t = estimate_action_priors(logs, space);
    CHECK(t.at(Action::Forward).motion.tx == doctest::Approx(0.20));
    CHECK_FALSE(t.at(Action::Forward).fallback);
    CHECK(t.at(Action::Forward).samples == 3);
    CHECK(t.at(Action::RotateLeft).fallback);
  }
  SUBCASE("no logs fall back to nominal motion") {
    const ActionPriorTable t = estimate_action_priors({}, space);
    CHECK(t.at(Action::Forward).fallback);
    CHECK(t.at(Action::Forward).motion.tx == doctest::Approx(0.2));
    CHECK(t.at(Action::Forward).motion.ty == 0.0);
    CHECK(t.at(Action::RotateLeft).motion.dtheta == doctest::Approx(7.2 * kDeg));
  }
  SUBCASE("30% collision-shortened steps: median above the mean") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> shortened(0.0, 0.1);
    std::vector<double> tx;
    for (int i = 0; i < 1000; ++i) tx.push_back(i % 10 < 3 ? shortened(rng) : 0.2);
    const std::vector<Trajectory> logs{forward_log(tx)};
    double mean = 0;
    for (double v : tx) mean += v;
    mean /= static_cast<double>(tx.size());
    const double med = estimate_action_priors(logs, space).at(Action::Forward).motion.tx;
    CHECK(med == doctest::Approx(0.2));
    CHECK(med > mean);
  }
}

TEST_CASE("consistency_distance") {
  const Vec2 goal{3.0, 2.0};
  const Pose2D truth(1.0, 1.5, 0.7);
  const GoalObservation obs = goal_signal(truth, goal);
  CHECK(consistency_distance(truth, obs, goal) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(consistency_distance(Pose2D(1.3, 1.5, 0.7), obs, goal) == doctest::Approx(0.3));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5), h(0, 2 * std::numbers::pi);
  for (int i = 0; i < 1000; ++i) {
    const Pose2D cand(u(rng), u(rng), h(rng));
    const GoalObservation o{std::abs(u(rng)), wrap_pi(h(rng))};
    const Vec2 g{u(rng), u(rng)};
    const double a = cand.heading + o.bearing;
    const double R[2][2] = {{std::cos(a), -std::sin(a)}, {std::sin(a), std::cos(a)}};
    const double bx = g.x - (R[0][0] * o.distance + R[0][1] * 0.0);
    const double by = g.y - (R[1][0] * o.distance + R[1][1] * 0.0);
    CHECK(consistency_distance(cand, o, g) == doctest::Approx(std::hypot(cand.x - bx, cand.y - by)).epsilon(1e-12));
  }
}

TEST_CASE("localize_step") {
  const GroundTruthMap map = testmaps::room(50, 40, 0.1);
  const SensorConfig sensor;
  const ActionSpace space = ActionSpace::continuous();
  const ActionPriorTable priors = ActionPriorTable::nominal(space);
  const LocalizerConfig cfg = LocalizerConfig::defaults(0.1);
  const Vec2 goal{4.5, 3.5};
  Rng rng(2);

  SUBCASE("noiseless step in an open room") {
    const Pose2D before(1.5, 1.2, 0.4);
    const Pose2D after = compose(before, RigidTransform2D(0.2, 0.0, 0.0));
    const RangeScan s0 = raycast_scan(map, before, sensor, 0.2, rng);
    const RangeScan s1 = raycast_scan(map, after, sensor, 0.2, rng);
    const PoseBelief b = localize_step({before, PoseSource::Prior, 0.0}, s0, s1, Action::Forward,
                                       goal_signal(after, goal), goal, priors, cfg);
    CHECK(b.source == PoseSource::Icp);
    CHECK(distance(b.pose.position(), after.position()) <= 0.02);
    CHECK(std::abs(wrap_pi(b.pose.heading - after.heading)) <= 0.5 * kDeg);
  }
  SUBCASE("no usable candidate forces the prior") {
    const Pose2D before(1.5, 1.2, 0.4);
    RangeScan empty;
    empty.ranges.assign(8, std::numeric_limits<double>::infinity());
    empty.bearings.assign(8, 0.0);
    const PoseBelief b = localize_step({before, PoseSource::Prior, 0.0}, empty, empty, Action::RotateLeft,
                                       goal_signal(before, goal), goal, priors, cfg);
    CHECK(b.source == PoseSource::Prior);
    CHECK(b.pose.heading == compose(before, priors.at(Action::RotateLeft).motion).heading);
  }
  SUBCASE("inconsistent goal signal rejects every ICP candidate") {
    const Pose2D before(1.5, 1.2, 0.4);
    const Pose2D after = compose(before, RigidTransform2D(0.2, 0.0, 0.0));
    const RangeScan s0 = raycast_scan(map, before, sensor, 0.2, rng);
    const RangeScan s1 = raycast_scan(map, after, sensor, 0.2, rng);
    GoalObservation off = goal_signal(after, goal);
    off.distance += 1.0;
    const PoseBelief b =
        localize_step({before, PoseSource::Prior, 0.0}, s0, s1, Action::Forward, off, goal, priors, cfg);
    CHECK(b.source == PoseSource::Prior);
    CHECK(b.discrepancy > cfg.consistency_gate);
  }
  SUBCASE("rotation-only step barely translates") {
    const Pose2D before(2.0, 2.0, 1.0);
    const Pose2D after = compose(before, RigidTransform2D(0.0, 0.0, 7.2 * kDeg));
    const RangeScan s0 = raycast_scan(map, before, sensor, 0.2, rng);
    const RangeScan s1 = raycast_scan(map, after, sensor, 0.2, rng);
    const PoseBelief b = localize_step({before, PoseSource::Prior, 0.0}, s0, s1, Action::RotateLeft,
                                       goal_signal(after, goal), goal, priors, cfg);
    const RigidTransform2D moved = relative(before, b.pose);
    CHECK(std::abs(moved.tx) <= 0.01);
    CHECK(std::abs(moved.ty) <= 0.01);
  }
}

TEST_CASE("property: localize_step arbitration and fine-tune") {
  MapSpec spec = MapSpec::continuous_default();
  spec.seed = 21;
  const GeneratedMap g = generate_map(spec);
  const SensorConfig sensor;
  const ActionSpace space = ActionSpace::continuous();
  const ActionPriorTable priors = ActionPriorTable::nominal(space);
  const LocalizerConfig cfg = LocalizerConfig::defaults(0.1);
  Rng rng(4);
  std::uniform_real_distribution<double> ux(0, g.map.width() * 0.1), uy(0, g.map.height() * 0.1),
      uh(0, 2 * std::numbers::pi), jitter(-0.15, 0.15), noise(-0.05, 0.05);
  std::uniform_int_distribution<int> act(0, 2);
  int icp = 0;
  for (int i = 0; i < 150;) {
    const Pose2D truth(ux(rng), uy(rng), uh(rng));
    if (!g.map.is_free(g.map.cell_of(truth.position()))) continue;
    const Action a = static_cast<Action>(act(rng));
    const StepOutcome o = step_continuous(g.map, truth, a, space, PhysicsConfig{}, rng);
    ++i;
    const Vec2 goal = g.episodes[0].goal;
    const Pose2D prev(truth.x + jitter(rng), truth.y + jitter(rng), truth.heading + noise(rng));
    const RangeScan s0 = raycast_scan(g.map, truth, sensor, 0.2, rng);
    const RangeScan s1 = raycast_scan(g.map, o.new_pose, sensor, 0.2, rng);
    const GoalObservation obs = goal_signal(o.new_pose, goal);
    const PoseBelief b = localize_step({prev, PoseSource::Prior, 0.0}, s0, s1, a, obs, goal, priors, cfg);
    if (b.source == PoseSource::Icp) {
      ++icp;
      CHECK(b.discrepancy <= cfg.consistency_gate);
    } else {
      CHECK(b.pose.heading == compose(prev, priors.at(a).motion).heading);
    }
    CHECK(b.discrepancy >= 0.0);
    CHECK(consistency_distance(b.pose, obs, goal) <= 1e-9);
  }
  CHECK(icp > 0);
}

TEST_CASE("kd-tree nearest neighbours match brute force") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<Vec2> pts(500);
  for (Vec2& p : pts) p = {u(rng), u(rng)};
  const KdTree2D tree(pts);
  for (int q = 0; q < 300; ++q) {
    const Vec2 query{u(rng), u(rng)};
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec2 d = pts[i] - query;
      all.push_back({d.dot(d), i});
    }
    std::sort(all.begin(), all.end());
    CHECK(tree.nearest(query).index == all[0].second);
    const auto k = tree.k_nearest(query, 5);
    REQUIRE(k.size() == 5);
    for (std::size_t j = 0; j < 5; ++j) CHECK(k[j].squared_distance == doctest::Approx(all[j].first));
  }
}

TEST_CASE("voxel thinning and normals") {
  std::vector<Vec2> line;
  for (int i = 0; i < 50; ++i) line.push_back({0.01 * i, 1.0});
  const std::vector<Vec2> thin = voxel_thin(line, 0.05);
  CHECK(thin.size() == 10);
  CHECK(thin.front() == line.front());
  CHECK(voxel_thin(line, 0.0).size() == line.size());
  const std::vector<Vec2> n = estimate_normals(line);
  for (Vec2 v : n) {
    CHECK(std::abs(v.x) <= 1e-9);
    CHECK(v.y == doctest::Approx(-1.0));
  }
}
