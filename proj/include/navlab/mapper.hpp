#pragma once

// Occupancy belief maintenance: the analytic mapper folds classified scan
// points into per-cell obstacle scores, the collision mapper stamps obstacles
// inferred from blocked translations, and the discrete-mode mapper tracks
// traversability separately for horizontal and vertical moves.

#include <cstdint>
#include <optional>
#include <vector>

#include "navlab/core.hpp"
#include "navlab/world.hpp"

namespace navlab {

/// Per-cell obstacle scores in [0,1].
struct OccupancyBelief {
  GridGeometry geometry;
  Grid<double> scores;

  OccupancyBelief() = default;
  explicit OccupancyBelief(const GridGeometry& g) : geometry(g), scores(g.width, g.height, 0.0) {}

  double score(Cell c) const { return scores[c]; }
  bool in_bounds(Cell c) const { return scores.in_bounds(c); }
};

/// Discrete-mode traversability; a set entry means entering that cell along
/// the map's axis was observed to be blocked.
struct DirectionalTraversal {
  Grid<std::uint8_t> horizontal;
  Grid<std::uint8_t> vertical;

  DirectionalTraversal() = default;
  DirectionalTraversal(int width, int height) : horizontal(width, height, 0), vertical(width, height, 0) {}
};

struct ObservedPoint {
  Vec2 point;       // map frame
  double distance;  // distance from the viewpoint, > 0
};

struct ClassifiedPoints {
  std::vector<ObservedPoint> free;
  std::vector<ObservedPoint> obstacle;
};

/// Ray endpoints become obstacle points; the ray interior is sampled every
/// half cell as free space. Points outside `bounds` are dropped.
ClassifiedPoints classify_scan(const RangeScan& scan, const Pose2D& belief_pose, const GridGeometry& bounds);

struct AnalyticMapperConfig {
  double free_discount{0.9};
  double obstacle_gain{0.5};     // increment = gain / distance
  double spread_fraction{0.1};   // share of each increment spread over the 8 neighbours
  double increment_cap{1.0};     // per-cell, per-scan increment ceiling, applied before spreading
};

/// Free points first, then obstacle increments (capped per cell), then
/// neighbour spreading, then clamping to [0,1].
void update_analytic(OccupancyBelief& belief, const ClassifiedPoints& points, const AnalyticMapperConfig& cfg = {});

/// Adds each cell's increment to itself and `fraction` of it, split evenly,
/// to its in-bounds 8-neighbours.
void spread_obstacle_increments(Grid<double>& scores, const Grid<double>& increments, double fraction);

/// Cell one forward step ahead of `pose` when a forward command fell short by
/// more than `threshold_fraction` of the step; rotations never collide.
std::optional<Cell> detect_collision(Action commanded, const RigidTransform2D& estimated, const Pose2D& belief_pose,
                                     const ActionSpace& space, const GridGeometry& geometry,
                                     double threshold_fraction = 0.5);

/// Center 1.0, 4-neighbours 0.5, diagonals 0.25, Chebyshev ring 2 at 0.1,
/// each merged with max.
void update_collision(OccupancyBelief& belief, Cell obstacle);

/// Records a move attempt between 4-adjacent cells in the map of its axis.
void update_traversal(DirectionalTraversal& maps, Cell from, Cell to, bool blocked);

}  // namespace navlab
