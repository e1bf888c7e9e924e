#pragma once

// Task-difficulty analysis on ground-truth maps: an idealized Monte-Carlo
// explorer that sees everything not hidden behind walls (ambiguity) and the
// number of direction changes on the optimal path (complexity).

#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "navlab/world.hpp"

namespace navlab {

/// 1 = visible, 0 = hidden.
using VisibilityMask = Grid<std::uint8_t>;

/// Cells whose center is joined to the viewpoint's cell center by a segment
/// that crosses no wall cell. Non-wall obstacles do not occlude. Throws
/// InvalidPosition when the viewpoint is not on a free cell.
VisibilityMask visible_region(const GroundTruthMap& map, Vec2 position);

/// Memoized visibility lists per viewpoint cell, shared across runs on one map.
class VisibilityCache {
 public:
  explicit VisibilityCache(const GroundTruthMap& map) : map_(&map) {}
  const std::vector<std::size_t>& visible_from(Cell c);

 private:
  const GroundTruthMap* map_;
  std::unordered_map<std::size_t, std::vector<std::size_t>> cache_;
};

struct Frontier {
  Cell cell;
  int crowding{0};  // other frontier cells in the 5x5 window around it

  friend bool operator==(const Frontier&, const Frontier&) = default;
};

using FrontierSet = std::vector<Frontier>;

/// Visible free cells 4-adjacent to a hidden free cell, in cell order.
FrontierSet compute_frontiers(const VisibilityMask& mask, const GroundTruthMap& map);

/// Draws a frontier with probability proportional to 1 / (1 + crowding).
/// Throws NoFrontier on an empty set.
Cell sample_subgoal(std::span<const Frontier> frontiers, Rng& rng);

/// Action accounting of the idealized explorer. Headings live on the grid
/// directions (8 for continuous worlds, 4 for discrete ones); each heading
/// change of one direction costs `rotation_cost`, each cell move
/// `translation_cost` (= cell_size / forward_step).
struct McProfile {
  int headings{8};
  double translation_cost{0.5};
  double rotation_cost{1.0};

  static McProfile for_world(const GroundTruthMap& map, const ActionSpace& space);
  int heading_index(double heading) const;
  Cell direction(int heading) const;
};

struct ActionPlan {
  std::vector<Action> actions;
  std::vector<Cell> cells;  // cell occupied after each action, starting cell first
  double cost{0.0};
  int final_heading{0};
};

/// Cheapest action sequence from (start, heading) to `goal` moving only
/// through cells with allowed[c] != 0. Diagonal moves need both orthogonal
/// neighbours allowed. Throws NoPath.
ActionPlan plan_actions(const Grid<std::uint8_t>& allowed, Cell start, int heading, Cell goal, const McProfile& profile);

/// Cost of the optimal action sequence on the fully known map.
double optimal_action_cost(const GroundTruthMap& map, const Episode& episode, const McProfile& profile);

/// Records every plan the explorer executed, for auditing.
struct McAudit {
  std::vector<std::vector<Cell>> plans;
  std::vector<VisibilityMask> observed_at_plan;
};

/// One exploration run; returns the total action cost. Throws Unreachable
/// when the goal cannot be reached and BudgetExceeded past 1e5 actions.
double run_2dmc(const GroundTruthMap& map, const Episode& episode, const McProfile& profile, Rng& rng,
                VisibilityCache* cache = nullptr, McAudit* audit = nullptr);

struct AmbiguityResult {
  std::vector<double> run_counts;
  double n_mc{0.0};
  double optimal_steps{0.0};
  double score{0.0};
};

/// Median exploration cost over `runs` seeded runs divided by the optimal cost.
AmbiguityResult ambiguity_score(const GroundTruthMap& map, const Episode& episode, const McProfile& profile, Rng& rng,
                                int runs = 20);

/// Number of indices where consecutive moves change direction.
int count_turns(std::span<const Cell> path);

/// Turns on the optimal ground-truth path (zero scores, obstacles masked, no
/// corner cutting; 8-connected for continuous worlds, 4 for discrete).
int complexity(const GroundTruthMap& map, const Episode& episode, WorldMode mode);

}  // namespace navlab
