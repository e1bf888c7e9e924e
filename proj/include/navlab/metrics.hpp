#pragma once

// Navigation diagnostics computed from trajectory logs: collision frequency,
// short- and long-term thrashing, the exploitation measure, SPL, Pearson
// correlation and per-agent summaries.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navlab/trajectory.hpp"
#include "navlab/world.hpp"

namespace navlab {

struct MetricsConfig {
  double delta{1e-4};    // movement threshold
  double epsilon{0.2};   // revisit radius, the agent's step size
  double bin_size{0.1};  // side of the square observation bins

  static MetricsConfig for_space(const ActionSpace& space, double cell_size) {
    return {1e-4, space.forward_step, cell_size};
  }
  void validate() const;
};

/// Percent of forward actions that collided; 0 with no forward actions.
double collision_frequency(const Trajectory& traj);

/// Percent of collisions immediately followed by the same action; 0 without
/// collisions.
double short_term_thrashing(const Trajectory& traj);

/// 100 * (1 - novel moves / moves), where a move t is l_t -> l_{t+1} with
/// length > delta and it is novel when l_t is farther than epsilon from every
/// earlier location. 0 without moves.
double long_term_thrashing(const Trajectory& traj, const MetricsConfig& cfg);

/// Shortest free-space path lengths to a goal cell, in cells, on the
/// ground-truth map: 4-connected for discrete worlds, 8-connected without
/// corner cutting (diagonal = sqrt 2) for continuous worlds.
class DistanceField {
 public:
  DistanceField(const GroundTruthMap& map, Vec2 goal, WorldMode mode);

  /// Optimal step count from `from` to the goal; throws Unreachable.
  double steps_from(Vec2 from, const ActionSpace& space) const;
  double cells_from(Cell c) const;
  bool reachable(Cell c) const;

 private:
  const GroundTruthMap* map_;
  Grid<double> cells_;
};

/// Minimum translation count between two free points under the active
/// action space. Throws Unreachable.
double optimal_distance(const GroundTruthMap& map, Vec2 from, Vec2 goal, const ActionSpace& space);

/// Number of distinct square bins containing at least one observed point.
std::size_t observed_bin_count(const Trajectory& traj, double bin_size);

/// N_b / (D_0 - min(D_1..D_T) + 1).
double exploitation(const Trajectory& traj, const GroundTruthMap& map, const MetricsConfig& cfg,
                    const ActionSpace& space);

struct EpisodeResult {
  bool success{false};
  double path_length_taken{0.0};  // actions taken
  double optimal_length{0.0};     // optimal translation steps from the start
  double final_distance{0.0};     // meters to the goal at the end
};

/// Mean of success * optimal / max(taken, optimal). Throws Undefined when empty.
double spl(std::span<const EpisodeResult> results);

/// Pearson product-moment correlation. Throws Undefined on zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Every per-episode diagnostic for one trajectory.
struct EpisodeEvaluation {
  EpisodeResult result;
  int steps{0};
  double collision_frequency{0.0};
  double short_term_thrashing{0.0};
  double long_term_thrashing{0.0};
  std::optional<double> exploitation;
  double spl_term{0.0};
};

EpisodeEvaluation evaluate_episode(const Trajectory& traj, const GroundTruthMap& map, const ActionSpace& space,
                                   const MetricsConfig& cfg);

struct MetricsReport {
  std::string agent;
  double noise_level{0.0};
  int episodes{0};
  double success_rate{0.0};  // percent
  double avg_steps{0.0};
  double mean_final_distance{0.0};
  double collision_frequency{0.0};
  double short_term_thrashing{0.0};
  double long_term_thrashing{0.0};
  double exploitation_median{0.0};
  double exploitation_mean{0.0};
  double spl{0.0};
};

/// Aggregates per-episode evaluations. Throws InvalidArgument when empty.
MetricsReport summarize(const std::string& agent, double noise_level, std::span<const EpisodeEvaluation> evals);

}  // namespace navlab
