#include <doctest.h>

#include <cmath>
#include <random>

#include "navlab/mapgen.hpp"
#include "navlab/metrics.hpp"
#include "oracles.hpp"
#include "test_maps.hpp"

using namespace navlab;

namespace {

Trajectory from_actions(const std::vector<Action>& a, const std::vector<bool>& c) {
  Trajectory t;
  for (std::size_t i = 0; i < a.size(); ++i) {
    StepRecord s;
    s.action = a[i];
    s.collided = c[i];
    t.steps.push_back(s);
  }
  return t;
}

Trajectory from_locations(const std::vector<Vec2>& l) {
  Trajectory t;
  for (std::size_t i = 0; i + 1 < l.size(); ++i) {
    StepRecord s;
    s.location = l[i];
    t.steps.push_back(s);
  }
  t.final_location = l.back();
  return t;
}

constexpr Action F = Action::Forward;
constexpr Action L = Action::RotateLeft;

}  // namespace

TEST_CASE("collision_frequency") {
  std::vector<Action> a(10, F);
  std::vector<bool> c(10, false);
  c[2] = c[7] = true;
  CHECK(collision_frequency(from_actions(a, c)) == 20.0);
  CHECK(collision_frequency(from_actions({L, L, Action::RotateRight}, {false, false, false})) == 0.0);
  CHECK(collision_frequency(from_actions({F, F, L}, {true, true, false})) == 100.0);
}

TEST_CASE("short_term_thrashing") {
  CHECK(short_term_thrashing(from_actions({F, F}, {true, false})) == 100.0);
  CHECK(short_term_thrashing(from_actions({F, L}, {true, false})) == 0.0);
  CHECK(short_term_thrashing(from_actions({F, L}, {false, false})) == 0.0);
  CHECK(short_term_thrashing(from_actions({L, F}, {false, true})) == 0.0);
}

TEST_CASE("long_term_thrashing") {
  const MetricsConfig cfg{1e-4, 0.2, 0.1};
  CHECK(long_term_thrashing(from_locations({{0, 0}, {0.3, 0}, {0.6, 0}, {0.9, 0}}), cfg) == 0.0);
  CHECK(long_term_thrashing(from_locations({{0, 0}, {0.2, 0}, {0, 0}}), cfg) == 50.0);
  CHECK(long_term_thrashing(from_locations({{1, 1}, {1, 1}, {1, 1}}), cfg) == 0.0);
}

TEST_CASE("long_term_thrashing approaches 100 when every move revisits") {
  const MetricsConfig cfg{1e-4, 0.2, 0.1};
  double last = 0;
  for (int n : {10, 100, 1000}) {
    std::vector<Vec2> l;
    for (int i = 0; i <= n; ++i) l.push_back({i % 2 == 0 ? 0.0 : 0.1, 0.0});
    const double th = long_term_thrashing(from_locations(l), cfg);
    CHECK(th > last);
    last = th;
  }
  CHECK(last > 99.0);
}

TEST_CASE("exploitation examples") {
  const GroundTruthMap map = testmaps::room(20, 3, 0.1);
  const ActionSpace space = ActionSpace::discrete();
  const MetricsConfig cfg{1e-4, 0.8, 0.1};
  Trajectory t;
  t.episode.goal = map.center_of({11, 2});
  for (int x : {6, 7, 9}) {
    StepRecord s;
    s.location = map.center_of({x, 2});
    t.steps.push_back(s);
  }
  t.final_location = map.center_of({8, 2});
  for (int i = 0; i < 10; ++i) t.steps[0].observed_points.push_back({0.05 + 0.1 * i, 0.05});
  t.steps[1].observed_points.push_back({0.06, 0.06});
  const double cells = 0.1 / 0.8;
  CHECK(observed_bin_count(t, 0.1) == 10);
  CHECK(exploitation(t, map, cfg, space) == doctest::Approx(10.0 / ((5 - 2) * cells + 1.0)));

  Trajectory still = t;
  for (StepRecord& s : still.steps) s.location = map.center_of({6, 2});
  still.final_location = map.center_of({6, 2});
  CHECK(exploitation(still, map, cfg, space) == doctest::Approx(10.0));
}

TEST_CASE("optimal_distance") {
  const GroundTruthMap corridor = GroundTruthMap::from_ascii({"#####", "#...#", "#####"}, 0.8);
  const ActionSpace ds = ActionSpace::discrete();
  CHECK(optimal_distance(corridor, corridor.center_of({1, 1}), corridor.center_of({1, 1}), ds) == 0.0);
  CHECK(optimal_distance(corridor, corridor.center_of({1, 1}), corridor.center_of({3, 1}), ds) == 2.0);
  const GroundTruthMap walled = GroundTruthMap::from_ascii({"#####", "#.#.#", "#####"}, 0.8);
  try {
    (void)optimal_distance(walled, walled.center_of({1, 1}), walled.center_of({3, 1}), ds);
    FAIL("expected Unreachable");
  } catch (const NavError& e) {
    CHECK(e.code() == ErrorCode::Unreachable);
  }
  const GroundTruthMap open = testmaps::room(10, 10, 0.1);
  CHECK(optimal_distance(open, open.center_of({1, 1}), open.center_of({5, 5}), ActionSpace::continuous()) ==
        doctest::Approx(4 * std::sqrt(2.0) * 0.1 / 0.2));
}

TEST_CASE("spl") {
  CHECK(spl(std::vector<EpisodeResult>{{true, 10, 10, 0}}) == 1.0);
  CHECK(spl(std::vector<EpisodeResult>{{false, 10, 10, 2}}) == 0.0);
  CHECK(spl(std::vector<EpisodeResult>{{true, 20, 10, 0}}) == 0.5);
  CHECK(spl(std::vector<EpisodeResult>{{true, 5, 10, 0}, {false, 3, 2, 1}}) == 0.5);
  try {
    (void)spl({});
    FAIL("expected Undefined");
  } catch (const NavError& e) {
    CHECK(e.code() == ErrorCode::Undefined);
  }
}

TEST_CASE("pearson") {
  const std::vector<double> x{1, 2, 3, 4.5};
  std::vector<double> neg;
  for (double v : x) neg.push_back(-v);
  CHECK(pearson(x, x) == doctest::Approx(1.0));
  CHECK(pearson(x, neg) == doctest::Approx(-1.0));
  try {
    (void)pearson(x, std::vector<double>(4, 2.0));
    FAIL("expected Undefined");
  } catch (const NavError& e) {
    CHECK(e.code() == ErrorCode::Undefined);
  }
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  std::vector<double> a(50), b(50);
  for (int i = 0; i < 50; ++i) {
    a[i] = n(rng);
    b[i] = 0.5 * a[i] + n(rng);
  }
  CHECK(pearson(a, b) == doctest::Approx(oracle::pearson(a, b)).epsilon(1e-12));
}

TEST_CASE("summarize") {
  std::vector<EpisodeEvaluation> ev(4);
  for (int i = 0; i < 4; ++i) {
    ev[i].result = {i < 3, 10.0 + i, 10.0, 0.1 * i};
    ev[i].steps = 10 + i;
    ev[i].exploitation = 1.0 + i;
    ev[i].spl_term = i < 3 ? 10.0 / (10.0 + i) : 0.0;
  }
  const MetricsReport r = summarize("Classical", 0.25, ev);
  CHECK(r.success_rate == 75.0);
  CHECK(r.avg_steps == 11.5);
  CHECK(r.mean_final_distance == doctest::Approx(0.15));
  CHECK(r.exploitation_median == 2.5);
  CHECK(r.exploitation_mean == 2.5);
  const MetricsReport again = summarize("Classical", 0.25, ev);
  CHECK(again.spl == r.spl);
  CHECK_THROWS_AS(summarize("x", 0, {}), NavError);
}

TEST_CASE("property: metrics match literal formulas on random trajectories") {
  std::mt19937_64 rng(91);
  const MetricsConfig cfg{1e-4, 0.2, 0.1};
  for (int i = 0; i < 300; ++i) {
    const Trajectory t = oracle::random_trajectory(rng);
    const double cf = collision_frequency(t), ts = short_term_thrashing(t), tl = long_term_thrashing(t, cfg);
    CHECK(std::abs(cf - oracle::collision_frequency(t)) <= 1e-9);
    CHECK(std::abs(ts - oracle::th_s(t)) <= 1e-9);
    CHECK(std::abs(tl - oracle::th_l(t, cfg.delta, cfg.epsilon)) <= 1e-9);
    CHECK(observed_bin_count(t, cfg.bin_size) == oracle::bins(t, cfg.bin_size));
    for (double v : {cf, ts, tl}) CHECK((v >= 0.0 && v <= 100.0));
    CHECK(collision_frequency(t) == cf);
  }
}

TEST_CASE("property: exploitation matches a recount on a generated map") {
  MapSpec spec = MapSpec::continuous_default();
  spec.seed = 5;
  const GeneratedMap g = generate_map(spec);
  const ActionSpace space = ActionSpace::continuous();
  const MetricsConfig cfg = MetricsConfig::for_space(space, 0.1);
  std::mt19937_64 rng(92);
  std::vector<Cell> free;
  for (int y = 0; y < g.map.height(); ++y) {
    for (int x = 0; x < g.map.width(); ++x) {
      if (g.map.is_free({x, y})) free.push_back({x, y});
    }
  }
  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  const Episode& ep = g.episodes[0];
  const Grid<double> field = oracle::octile_field(g.map, g.map.cell_of(ep.goal));
  for (int trial = 0; trial < 20; ++trial) {
    Trajectory t = oracle::random_trajectory(rng, 30);
    t.episode = ep;
    for (StepRecord& s : t.steps) s.location = g.map.center_of(free[pick(rng)]);
    t.final_location = g.map.center_of(free[pick(rng)]);
    if (!t.steps.empty()) t.steps[0].location = ep.start.position();
    const std::vector<Vec2> l = t.locations();
    const double d0 = field[g.map.cell_of(l[0])] * 0.1 / 0.2;
    double best = d0;
    for (std::size_t i = 1; i < l.size(); ++i) best = std::min(best, field[g.map.cell_of(l[i])] * 0.1 / 0.2);
    const double expect = static_cast<double>(oracle::bins(t, cfg.bin_size)) / (d0 - best + 1.0);
    CHECK(std::abs(exploitation(t, g.map, cfg, space) - expect) <= 1e-9);
  }
}
