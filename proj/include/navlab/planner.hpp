#pragma once

// Weighted A* over the occupancy belief, subgoal selection along the
// resulting waypoints, and the heading-threshold controller.

#include <cstdint>
#include <span>
#include <vector>

#include "navlab/core.hpp"
#include "navlab/mapper.hpp"
#include "navlab/world.hpp"

namespace navlab {

inline constexpr double kObstacleEdgeWeight = 2000.0;
inline constexpr double kStraightEdgeCost = 1.0;
inline constexpr double kDiagonalEdgeCost = 1.4;
/// Scores at or above this block line of sight.
inline constexpr double kLineOfSightBlock = 0.5;

/// weight(A->B) = score(B) * 2000 + (1.4 diagonal | 1.0 straight)
inline double edge_weight(double target_score, bool diagonal) {
  return target_score * kObstacleEdgeWeight + (diagonal ? kDiagonalEdgeCost : kStraightEdgeCost);
}

enum class Connectivity { Four, Eight };

struct PlanOptions {
  Connectivity connectivity{Connectivity::Eight};
  /// Optional hard mask; non-zero cells are removed from the graph.
  const Grid<std::uint8_t>* blocked{nullptr};
  /// When false, a diagonal step needs both adjacent orthogonal cells unmasked.
  bool allow_corner_cutting{true};
};

struct Plan {
  std::vector<Cell> waypoints;  // start ... goal
  double cost{0.0};
};

/// Minimum-cost path under edge_weight with an octile heuristic. Ties on f
/// are broken by smaller h, then by cell order. Throws NoPath.
Plan weighted_astar(const Grid<double>& scores, Cell start, Cell goal, const PlanOptions& options = {});

/// 4-connected plan for the discrete agent: entering a cell costs as if its
/// score were 1 when the traversal map of the move's axis marks it blocked.
Plan directional_astar(const DirectionalTraversal& traversal, const Grid<double>& scores, Cell start, Cell goal);

/// Sum of edge weights along consecutive waypoints.
double path_cost(const Grid<double>& scores, std::span<const Cell> waypoints);

/// Continuous: the farthest waypoint whose straight segment from the pose
/// crosses only cells scoring below 0.5 (the pose's own cell excepted),
/// falling back to the first waypoint after the start. Discrete: the first
/// waypoint after the current cell.
Cell select_subgoal(std::span<const Cell> waypoints, const OccupancyBelief& belief, const Pose2D& pose, WorldMode mode);

/// True when segment a->b crosses no cell scoring >= 0.5, ignoring the cell of a.
bool line_of_sight(const OccupancyBelief& belief, Vec2 a, Vec2 b);

struct ControlConfig {
  double angle_threshold{kTwoPi / 100.0};

  /// Half a turn step.
  static ControlConfig for_space(const ActionSpace& space) { return {space.turn_step / 2.0}; }
};

/// Forward when the target bearing is within the threshold, otherwise turn
/// toward it (left for positive bearing).
Action next_action(const Pose2D& pose, Vec2 target, const ControlConfig& cfg);

}  // namespace navlab
