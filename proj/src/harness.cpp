#include "navlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "navlab/io.hpp"

namespace navlab {

const char* to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Classical: return "Classical";
    case AgentKind::ClassicalGT: return "ClassicalGT";
    case AgentKind::Random: return "Random";
    case AgentKind::Greedy: return "Greedy";
  }
  return "Unknown";
}

AgentKind agent_from_string(const std::string& s) {
  for (AgentKind k : {AgentKind::Classical, AgentKind::ClassicalGT, AgentKind::Random, AgentKind::Greedy}) {
    if (s == to_string(k)) return k;
  }
  throw NavError(ErrorCode::ParseError, "unknown agent '" + s + "'");
}

bool agent_supports(AgentKind k, WorldMode mode) { return k != AgentKind::Classical || mode == WorldMode::Continuous; }

EpisodeConfig EpisodeConfig::for_map(const GroundTruthMap& map, WorldMode mode) {
  EpisodeConfig c;
  c.space = mode == WorldMode::Continuous ? ActionSpace::continuous() : ActionSpace::discrete();
  c.physics = PhysicsConfig::for_mode(mode);
  c.localizer = LocalizerConfig::defaults(map.cell_size());
  c.control = ControlConfig::for_space(c.space);
  c.priors = ActionPriorTable::nominal(c.space);
  return c;
}

Action baseline_step(AgentKind kind, const GoalObservation& goal, const ActionSpace& space, const ControlConfig& control,
                     Rng& rng) {
  if (kind == AgentKind::Random) {
    const std::vector<Action> actions = space.actions();
    return actions[std::uniform_int_distribution<std::size_t>(0, actions.size() - 1)(rng)];
  }
  if (kind != AgentKind::Greedy) throw NavError(ErrorCode::InvalidArgument, "not a baseline agent");
  if (std::abs(goal.bearing) <= control.angle_threshold) return Action::Forward;
  return goal.bearing > 0.0 ? Action::RotateLeft : Action::RotateRight;
}

namespace {

/// Mapper + planner + controller, with either scan-matching or ground-truth pose.
class ClassicalAgent {
 public:
  ClassicalAgent(const GroundTruthMap& map, const Episode& episode, const EpisodeConfig& cfg, bool ground_truth)
      : map_(map), episode_(episode), cfg_(cfg), ground_truth_(ground_truth), occ_(map.geometry()),
        traversal_(map.width(), map.height()), belief_{episode.start, PoseSource::Prior, 0.0} {}

  void reset_pose(const Pose2D& p) { belief_.pose = p; }
  const Pose2D& pose() const { return belief_.pose; }

  Action decide(const RangeScan& scan) {
    const WorldMode mode = cfg_.space.mode;
    update_analytic(occ_, classify_scan(scan, belief_.pose, occ_.geometry), cfg_.mapper);
    const Cell cur = occ_.geometry.cell_of(belief_.pose.position());
    const Cell goal = occ_.geometry.cell_of(episode_.goal);
    if (!occ_.in_bounds(cur)) throw NavError(ErrorCode::InvalidPose, "belief pose left the map");
    const Plan plan = mode == WorldMode::Continuous ? weighted_astar(occ_.scores, cur, goal)
                                                    : directional_astar(traversal_, occ_.scores, cur, goal);
    Vec2 target = episode_.goal;
    if (plan.waypoints.size() > 1) {
      // Hold the subgoal until within a step of it while it stays in sight (on the plan, in discrete mode).
      const bool keep =
          subgoal_ && !(*subgoal_ == cur) &&
          distance(belief_.pose.position(), occ_.geometry.center_of(*subgoal_)) >= cfg_.space.forward_step &&
          (mode == WorldMode::Discrete
               ? std::find(plan.waypoints.begin(), plan.waypoints.end(), *subgoal_) != plan.waypoints.end()
               : line_of_sight(occ_, belief_.pose.position(), occ_.geometry.center_of(*subgoal_)));
      if (!keep) subgoal_ = select_subgoal(plan.waypoints, occ_, belief_.pose, mode);
      if (!(*subgoal_ == goal)) target = occ_.geometry.center_of(*subgoal_);
    } else {
      subgoal_.reset();
    }
    return next_action(belief_.pose, target, cfg_.control);
  }

  void observe(Action a, const RangeScan& previous_scan, const RangeScan& scan, const Pose2D& truth,
               const GoalObservation& goal_obs) {
    const Pose2D prev = belief_.pose;
    if (ground_truth_) {
      belief_.pose = truth;
    } else {
      belief_ = localize_step(belief_, previous_scan, scan, a, goal_obs, episode_.goal, cfg_.priors, cfg_.localizer);
    }
    if (cfg_.space.mode == WorldMode::Continuous) {
      const auto hit = detect_collision(a, relative(prev, belief_.pose), prev, cfg_.space, occ_.geometry,
                                        cfg_.collision_threshold);
      if (hit && occ_.in_bounds(*hit)) update_collision(occ_, *hit);
    } else if (a == Action::Forward) {
      const Cell from = occ_.geometry.cell_of(prev.position());
      const Cell to = from + kDirections4[static_cast<std::size_t>(quarter_turns(prev.heading))];
      const bool blocked = occ_.geometry.cell_of(belief_.pose.position()) == from;
      if (occ_.in_bounds(to)) update_traversal(traversal_, from, to, blocked);
    }
  }

 private:
  const GroundTruthMap& map_;
  const Episode& episode_;
  const EpisodeConfig& cfg_;
  bool ground_truth_;
  OccupancyBelief occ_;
  DirectionalTraversal traversal_;
  PoseBelief belief_;
  std::optional<Cell> subgoal_;
};

std::vector<Vec2> world_points(const RangeScan& scan, const Pose2D& pose) {
  std::vector<Vec2> out = scan.points();
  for (Vec2& p : out) p = pose.position() + rotate(p, pose.heading);
  return out;
}

}  // namespace

EpisodeRun run_episode(AgentKind agent, const GroundTruthMap& map, const Episode& episode, const EpisodeConfig& cfg,
                       std::uint64_t seed) {
  const WorldMode mode = cfg.space.mode;
  if (!agent_supports(agent, mode)) throw NavError(ErrorCode::InvalidArgument, "agent not valid in this world mode");
  Rng world_rng(derive_seed(seed, 1));
  Rng sensor_rng(derive_seed(seed, 2));
  Rng agent_rng(derive_seed(seed, 3));
  SensorConfig sensor = cfg.sensor;
  sensor.noise_level = cfg.noise_level;

  Pose2D truth = episode.start;
  if (mode == WorldMode::Discrete) {
    const Vec2 c = map.center_of(map.cell_of(truth.position()));
    truth = Pose2D(c.x, c.y, quarter_turns(truth.heading) * (std::numbers::pi / 2.0));
  }
  EpisodeRun run;
  run.trajectory.episode = episode;
  std::optional<ClassicalAgent> classical;
  if (agent == AgentKind::Classical || agent == AgentKind::ClassicalGT) {
    classical.emplace(map, episode, cfg, agent == AgentKind::ClassicalGT);
    classical->reset_pose(truth);
  }

  const GridGeometry geom = map.geometry();
  RangeScan scan = raycast_scan(map, truth, sensor, cfg.space.forward_step, sensor_rng);
  int t = 0;
  while (episode_status(truth, episode, t, mode, geom) == EpisodeStatus::Running) {
    Action a = Action::Stay;
    try {
      a = classical ? classical->decide(scan)
                    : baseline_step(agent, goal_signal(truth, episode.goal), cfg.space, cfg.control, agent_rng);
    } catch (const std::exception& e) {
      run.diagnostic = e.what();
      break;
    }
    StepRecord rec;
    rec.action = a;
    rec.location = truth.position();
    rec.observed_points = world_points(scan, truth);
    if (classical) rec.belief = classical->pose();
    const StepOutcome out = step_world(map, truth, a, cfg.space, cfg.physics, world_rng);
    rec.collided = out.collided;
    rec.achieved = out.achieved_transform;
    run.trajectory.steps.push_back(std::move(rec));
    truth = out.new_pose;
    ++t;
    RangeScan next = raycast_scan(map, truth, sensor, cfg.space.forward_step, sensor_rng);
    if (classical) {
      try {
        classical->observe(a, scan, next, truth, goal_signal(truth, episode.goal));
      } catch (const std::exception& e) {
        run.diagnostic = e.what();
        scan = std::move(next);
        break;
      }
    }
    scan = std::move(next);
  }
  run.trajectory.final_location = truth.position();
  run.trajectory.final_status = episode_status(truth, episode, t, mode, geom) == EpisodeStatus::Success
                                    ? FinalStatus::Success
                                    : FinalStatus::Timeout;
  run.evaluation = evaluate_episode(run.trajectory, map, cfg.space, MetricsConfig::for_space(cfg.space, map.cell_size()));
  return run;
}

ActionPriorTable train_priors(std::span<const GeneratedMap> maps, const EpisodeConfig& cfg, int episodes_per_map,
                              std::uint64_t seed) {
  std::vector<Trajectory> logs;
  for (std::size_t m = 0; m < maps.size(); ++m) {
    const auto& eps = maps[m].episodes;
    const int n = std::min<int>(episodes_per_map, static_cast<int>(eps.size()));
    EpisodeConfig c = cfg;
    c.noise_level = 0.0;
    for (int e = 0; e < n; ++e) {
      logs.push_back(run_episode(AgentKind::ClassicalGT, maps[m].map, eps[static_cast<std::size_t>(e)], c,
                                 derive_seed(seed, 0x747261696e, m, static_cast<std::uint64_t>(e)))
                         .trajectory);
    }
  }
  return estimate_action_priors(logs, cfg.space);
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(threads, count); ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void RunConfig::validate() const {
  if (agents.empty()) throw NavError(ErrorCode::InvalidArgument, "no agents");
  for (AgentKind a : agents) {
    if (!agent_supports(a, mode)) throw NavError(ErrorCode::InvalidArgument, std::string(to_string(a)) + " not valid in this mode");
  }
  if (noise_levels.empty()) throw NavError(ErrorCode::InvalidArgument, "no noise levels");
  for (double n : noise_levels) {
    if (n < 0.0) throw NavError(ErrorCode::InvalidArgument, "noise levels must be >= 0");
  }
  if (map_files.empty()) {
    map_spec.validate();
    if (map_spec.mode != mode) throw NavError(ErrorCode::InvalidArgument, "map spec mode differs from run mode");
    if (map_count < 1) throw NavError(ErrorCode::InvalidArgument, "map_count must be >= 1");
  }
  if (threads < 1) throw NavError(ErrorCode::InvalidArgument, "threads must be >= 1");
  if (analysis.mc_runs < 1) throw NavError(ErrorCode::InvalidArgument, "mc_runs must be >= 1");
}

std::vector<GeneratedMap> benchmark_maps(const RunConfig& cfg) {
  std::vector<GeneratedMap> maps;
  if (!cfg.map_files.empty()) {
    for (const std::string& f : cfg.map_files) maps.push_back(load_generated(f));
    return maps;
  }
  for (int m = 0; m < cfg.map_count; ++m) {
    MapSpec spec = cfg.map_spec;
    spec.seed = derive_seed(cfg.seed, 0x6d6170, static_cast<std::uint64_t>(m));
    maps.push_back(generate_map(spec));
  }
  return maps;
}

BenchmarkResult run_benchmark(const RunConfig& cfg, const std::vector<GeneratedMap>& maps) {
  cfg.validate();
  BenchmarkResult out;
  if (maps.empty()) throw NavError(ErrorCode::InvalidArgument, "no maps");

  const bool needs_priors = std::find(cfg.agents.begin(), cfg.agents.end(), AgentKind::Classical) != cfg.agents.end();
  {
    const EpisodeConfig base = EpisodeConfig::for_map(maps.front().map, cfg.mode);
    out.priors = needs_priors ? train_priors(maps, base, cfg.training_episodes_per_map, derive_seed(cfg.seed, 0x7072696f72))
                              : ActionPriorTable::nominal(base.space);
  }

  struct Job {
    int map;
    int episode;
    std::size_t agent;
    std::size_t noise;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < maps.size(); ++m) {
    for (std::size_t e = 0; e < maps[m].episodes.size(); ++e) {
      for (std::size_t a = 0; a < cfg.agents.size(); ++a) {
        for (std::size_t n = 0; n < cfg.noise_levels.size(); ++n) {
          jobs.push_back({static_cast<int>(m), static_cast<int>(e), a, n});
        }
      }
    }
  }
  out.episodes.resize(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), cfg.threads, [&](int i) {
    const Job& j = jobs[static_cast<std::size_t>(i)];
    const GeneratedMap& g = maps[static_cast<std::size_t>(j.map)];
    EpisodeConfig ec = EpisodeConfig::for_map(g.map, cfg.mode);
    ec.priors = out.priors;
    ec.noise_level = cfg.noise_levels[j.noise];
    const AgentKind agent = cfg.agents[j.agent];
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(j.map) << 20 | static_cast<std::uint64_t>(j.episode),
                                           j.noise, static_cast<std::uint64_t>(agent));
    EpisodeRecord& rec = out.episodes[static_cast<std::size_t>(i)];
    rec.map = j.map;
    rec.episode = j.episode;
    rec.agent = agent;
    rec.noise_level = ec.noise_level;
    EpisodeRun run = run_episode(agent, g.map, g.episodes[static_cast<std::size_t>(j.episode)], ec, seed);
    rec.evaluation = run.evaluation;
    rec.diagnostic = run.diagnostic;
  });
  for (const EpisodeRecord& r : out.episodes) out.failures += r.diagnostic.empty() ? 0 : 1;

  for (AgentKind agent : cfg.agents) {
    for (double noise : cfg.noise_levels) {
      std::vector<EpisodeEvaluation> evals;
      for (const EpisodeRecord& r : out.episodes) {
        if (r.agent == agent && r.noise_level == noise) evals.push_back(r.evaluation);
      }
      out.reports.push_back(summarize(to_string(agent), noise, evals));
    }
  }

  if (cfg.analysis.enabled) {
    std::vector<std::pair<int, int>> keys;
    for (std::size_t m = 0; m < maps.size(); ++m) {
      for (std::size_t e = 0; e < maps[m].episodes.size(); ++e) keys.push_back({static_cast<int>(m), static_cast<int>(e)});
    }
    out.difficulty.resize(keys.size());
    parallel_for(static_cast<int>(keys.size()), cfg.threads, [&](int i) {
      const auto [m, e] = keys[static_cast<std::size_t>(i)];
      const GeneratedMap& g = maps[static_cast<std::size_t>(m)];
      const Episode& ep = g.episodes[static_cast<std::size_t>(e)];
      const ActionSpace space = cfg.mode == WorldMode::Continuous ? ActionSpace::continuous() : ActionSpace::discrete();
      EpisodeDifficulty& d = out.difficulty[static_cast<std::size_t>(i)];
      d.map = m;
      d.episode = e;
      d.complexity = complexity(g.map, ep, cfg.mode);
      d.optimal_steps = optimal_distance(g.map, ep.start.position(), ep.goal, space);
      Rng rng(derive_seed(cfg.seed, 0x616d6267, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(e)));
      try {
        d.ambiguity = ambiguity_score(g.map, ep, McProfile::for_world(g.map, space), rng, cfg.analysis.mc_runs).score;
      } catch (const NavError&) {
        d.ambiguity.reset();
      }
    });

    for (AgentKind agent : cfg.agents) {
      for (double noise : cfg.noise_levels) {
        CorrelationRow row;
        row.agent = agent;
        row.noise_level = noise;
        std::vector<double> amb, spl_a, cpx, spl_c;
        for (const EpisodeRecord& r : out.episodes) {
          if (r.agent != agent || r.noise_level != noise) continue;
          const EpisodeDifficulty* d = nullptr;
          for (const EpisodeDifficulty& x : out.difficulty) {
            if (x.map == r.map && x.episode == r.episode) d = &x;
          }
          if (d == nullptr) continue;
          cpx.push_back(d->complexity);
          spl_c.push_back(r.evaluation.spl_term);
          if (d->ambiguity) {
            amb.push_back(*d->ambiguity);
            spl_a.push_back(r.evaluation.spl_term);
          }
        }
        row.samples = spl_c.size();
        try {
          row.ambiguity_vs_spl = pearson(amb, spl_a);
        } catch (const NavError&) {
        }
        try {
          row.complexity_vs_spl = pearson(cpx, spl_c);
        } catch (const NavError&) {
        }
        out.correlations.push_back(row);
      }
    }
  }
  return out;
}

}  // namespace navlab
