#include "navlab/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "navlab/raster.hpp"

namespace navlab {

namespace {

struct QueueEntry {
  double f;
  double h;
  Cell cell;
  double g;

  bool operator>(const QueueEntry& o) const { return std::tie(f, h, cell, g) > std::tie(o.f, o.h, o.cell, o.g); }
};

double octile(Cell a, Cell b) {
  const int dx = std::abs(a.x - b.x);
  const int dy = std::abs(a.y - b.y);
  const int lo = std::min(dx, dy);
  const int hi = std::max(dx, dy);
  return kStraightEdgeCost * (hi - lo) + kDiagonalEdgeCost * lo;
}

/// Generic grid A*. `edge` returns the weight of a move or a negative value
/// if the move is not allowed. Nodes reopen on any improvement and the
/// search runs until no open entry can match the goal cost up to rounding,
/// so the result is the least floating-point path sum, same as Dijkstra.
template <typename EdgeFn>
Plan grid_astar(int width, int height, Cell start, Cell goal, Connectivity conn, EdgeFn&& edge) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Grid<double> g(width, height, kInf);
  Grid<int> parent(width, height, -1);
  if (!g.in_bounds(start) || !g.in_bounds(goal)) throw NavError(ErrorCode::InvalidArgument, "start or goal out of bounds");

  auto heuristic = [&](Cell c) {
    return conn == Connectivity::Eight ? octile(c, goal) : kStraightEdgeCost * manhattan(c, goal);
  };
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
  g[start] = 0.0;
  open.push({heuristic(start), heuristic(start), start, 0.0});
  const std::span<const Cell> dirs = conn == Connectivity::Eight ? std::span<const Cell>(kDirections8)
                                                                 : std::span<const Cell>(kDirections4);
  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    if (top.g != g[top.cell]) continue;
    if (g[goal] < kInf && top.f > g[goal] * (1.0 + 1e-12) + 1e-12) break;
    if (top.cell == goal) continue;
    for (Cell d : dirs) {
      const Cell n = top.cell + d;
      if (!g.in_bounds(n)) continue;
      const double w = edge(top.cell, n, d.x != 0 && d.y != 0);
      if (w < 0.0) continue;
      const double cand = top.g + w;
      if (cand < g[n]) {
        g[n] = cand;
        parent[n] = static_cast<int>(g.index(top.cell));
        const double h = heuristic(n);
        open.push({cand + h, h, n, cand});
      }
    }
  }
  if (g[goal] == kInf) throw NavError(ErrorCode::NoPath, "goal not reachable in the planning graph");
  Plan plan;
  plan.cost = g[goal];
  for (Cell c = goal;;) {
    plan.waypoints.push_back(c);
    if (c == start) break;
    c = g.cell_at(static_cast<std::size_t>(parent[c]));
  }
  std::reverse(plan.waypoints.begin(), plan.waypoints.end());
  return plan;
}

}  // namespace

Plan weighted_astar(const Grid<double>& scores, Cell start, Cell goal, const PlanOptions& options) {
  const Grid<std::uint8_t>* mask = options.blocked;
  auto masked = [&](Cell c) { return mask != nullptr && (*mask)[c] != 0; };
  if (scores.in_bounds(start) && masked(start)) throw NavError(ErrorCode::NoPath, "start cell is masked");
  return grid_astar(scores.width(), scores.height(), start, goal, options.connectivity,
                    [&](Cell from, Cell to, bool diagonal) {
                      if (masked(to)) return -1.0;
                      if (diagonal && !options.allow_corner_cutting &&
                          (masked(Cell{to.x, from.y}) || masked(Cell{from.x, to.y}))) {
                        return -1.0;
                      }
                      return edge_weight(scores[to], diagonal);
                    });
}

Plan directional_astar(const DirectionalTraversal& traversal, const Grid<double>& scores, Cell start, Cell goal) {
  return grid_astar(scores.width(), scores.height(), start, goal, Connectivity::Four,
                    [&](Cell from, Cell to, bool) {
                      const auto& axis = to.x != from.x ? traversal.horizontal : traversal.vertical;
                      return edge_weight(axis[to] ? 1.0 : scores[to], false);
                    });
}

double path_cost(const Grid<double>& scores, std::span<const Cell> waypoints) {
  double cost = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    const bool diagonal = waypoints[i].x != waypoints[i - 1].x && waypoints[i].y != waypoints[i - 1].y;
    cost += edge_weight(scores[waypoints[i]], diagonal);
  }
  return cost;
}

bool line_of_sight(const OccupancyBelief& belief, Vec2 a, Vec2 b) {
  const Cell own = belief.geometry.cell_of(a);
  bool clear = true;
  traverse_segment(belief.geometry, a, b, [&](Cell c, double) {
    if (c == own) return true;
    if (!belief.in_bounds(c) || belief.score(c) >= kLineOfSightBlock) {
      clear = false;
      return false;
    }
    return true;
  });
  return clear;
}

Cell select_subgoal(std::span<const Cell> waypoints, const OccupancyBelief& belief, const Pose2D& pose,
                    WorldMode mode) {
  if (waypoints.empty()) throw NavError(ErrorCode::InvalidArgument, "no waypoints");
  const Cell fallback = waypoints.size() > 1 ? waypoints[1] : waypoints[0];
  if (mode == WorldMode::Discrete) return fallback;
  for (std::size_t i = waypoints.size(); i-- > 1;) {
    if (line_of_sight(belief, pose.position(), belief.geometry.center_of(waypoints[i]))) return waypoints[i];
  }
  return fallback;
}

Action next_action(const Pose2D& pose, Vec2 target, const ControlConfig& cfg) {
  const double bearing = goal_signal(pose, target).bearing;
  if (std::abs(bearing) <= cfg.angle_threshold) return Action::Forward;
  return bearing > 0 ? Action::RotateLeft : Action::RotateRight;
}

}  // namespace navlab
