#pragma once

// Agents, the episode loop and seeded benchmark sweeps.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navlab/envanalysis.hpp"
#include "navlab/localizer.hpp"
#include "navlab/mapgen.hpp"
#include "navlab/mapper.hpp"
#include "navlab/metrics.hpp"
#include "navlab/planner.hpp"
#include "navlab/trajectory.hpp"

namespace navlab {

enum class AgentKind { Classical, ClassicalGT, Random, Greedy };

const char* to_string(AgentKind k);
AgentKind agent_from_string(const std::string& s);
/// Classical needs continuous scans; every other agent runs in both modes.
bool agent_supports(AgentKind k, WorldMode mode);

struct EpisodeConfig {
  ActionSpace space{ActionSpace::continuous()};
  SensorConfig sensor;
  PhysicsConfig physics{PhysicsConfig::for_mode(WorldMode::Continuous)};
  AnalyticMapperConfig mapper;
  LocalizerConfig localizer{LocalizerConfig::defaults(0.1)};
  ControlConfig control{ControlConfig::for_space(ActionSpace::continuous())};
  ActionPriorTable priors{ActionPriorTable::nominal(ActionSpace::continuous())};
  double noise_level{0.0};  // fraction of forward_step covered by 3 sigma
  double collision_threshold{0.5};

  static EpisodeConfig for_map(const GroundTruthMap& map, WorldMode mode);
};

struct EpisodeRun {
  Trajectory trajectory;
  EpisodeEvaluation evaluation;
  std::string diagnostic;  // set when the agent failed internally
};

/// Runs one episode to Success or Timeout. Internal agent errors end the
/// episode as Timeout with a diagnostic. Throws InvalidArgument for an
/// unsupported agent/mode pair.
EpisodeRun run_episode(AgentKind agent, const GroundTruthMap& map, const Episode& episode, const EpisodeConfig& cfg,
                       std::uint64_t seed);

/// Random: uniform over the action space. Greedy: rotate toward the goal
/// bearing until within the control threshold, then forward.
Action baseline_step(AgentKind kind, const GoalObservation& goal, const ActionSpace& space, const ControlConfig& control,
                     Rng& rng);

/// Action priors from ground-truth-localized classical runs on the given maps.
ActionPriorTable train_priors(std::span<const GeneratedMap> maps, const EpisodeConfig& cfg, int episodes_per_map,
                              std::uint64_t seed);

struct AnalysisConfig {
  bool enabled{true};
  int mc_runs{20};
};

struct RunConfig {
  WorldMode mode{WorldMode::Continuous};
  std::vector<AgentKind> agents{AgentKind::ClassicalGT, AgentKind::Classical, AgentKind::Random, AgentKind::Greedy};
  MapSpec map_spec{MapSpec::continuous_default()};
  int map_count{4};
  std::vector<std::string> map_files;  // used instead of generation when non-empty
  std::vector<double> noise_levels{0.0};
  std::uint64_t seed{1};
  int training_episodes_per_map{2};
  int threads{1};
  AnalysisConfig analysis;
  std::string output{"navlab_out"};

  void validate() const;
};

struct EpisodeRecord {
  int map{0};
  int episode{0};
  AgentKind agent{AgentKind::ClassicalGT};
  double noise_level{0.0};
  EpisodeEvaluation evaluation;
  std::string diagnostic;
};

struct EpisodeDifficulty {
  int map{0};
  int episode{0};
  std::optional<double> ambiguity;
  int complexity{0};
  double optimal_steps{0.0};
};

struct CorrelationRow {
  AgentKind agent{AgentKind::ClassicalGT};
  double noise_level{0.0};
  std::optional<double> ambiguity_vs_spl;
  std::optional<double> complexity_vs_spl;
  std::size_t samples{0};
};

struct BenchmarkResult {
  std::vector<MetricsReport> reports;  // ordered by (agent, noise)
  std::vector<EpisodeRecord> episodes;  // ordered by (map, episode, agent, noise)
  std::vector<EpisodeDifficulty> difficulty;
  std::vector<CorrelationRow> correlations;
  ActionPriorTable priors;
  int failures{0};  // episodes that ended with an internal diagnostic
};

/// Loads or generates maps per the config.
std::vector<GeneratedMap> benchmark_maps(const RunConfig& cfg);

/// Every (map, episode, agent, noise) combination, summarized.
BenchmarkResult run_benchmark(const RunConfig& cfg, const std::vector<GeneratedMap>& maps);

/// Runs `count` jobs on up to `threads` workers; fn(i) fills slot i.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace navlab
