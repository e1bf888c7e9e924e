#include "navlab/mapper.hpp"

#include <algorithm>
#include <cmath>

namespace navlab {

namespace {

// Endpoints sit exactly on a cell boundary; nudging them along the ray puts
// them inside the cell that was hit regardless of ray direction.
constexpr double kEndpointNudge = 1e-6;

}  // namespace

ClassifiedPoints classify_scan(const RangeScan& scan, const Pose2D& belief_pose, const GridGeometry& bounds) {
  ClassifiedPoints out;
  const double spacing = bounds.cell_size / 2.0;
  const Vec2 origin = belief_pose.position();
  auto keep = [&](Vec2 p) { return bounds.in_bounds(bounds.cell_of(p)); };
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const double r = scan.ranges[i];
    const bool no_return = RangeScan::is_max_range(r);
    const double extent = no_return ? scan.max_range : r;
    const Vec2 dir = unit(belief_pose.heading + scan.bearings[i]);
    for (int k = 1;; ++k) {
      const double d = k * spacing;
      if (d >= extent - 1e-9) break;
      const Vec2 p = origin + d * dir;
      if (keep(p)) out.free.push_back({p, d});
    }
    if (!no_return) {
      const Vec2 p = origin + (r + kEndpointNudge) * dir;
      if (keep(p)) out.obstacle.push_back({p, r});
    }
  }
  return out;
}

void spread_obstacle_increments(Grid<double>& scores, const Grid<double>& increments, double fraction) {
  for (int y = 0; y < increments.height(); ++y) {
    for (int x = 0; x < increments.width(); ++x) {
      const double w = increments[Cell{x, y}];
      if (w == 0.0) continue;
      scores[Cell{x, y}] += w;
      const double share = fraction * w / 8.0;
      for (Cell d : kDirections8) {
        const Cell n{x + d.x, y + d.y};
        if (scores.in_bounds(n)) scores[n] += share;
      }
    }
  }
}

void update_analytic(OccupancyBelief& belief, const ClassifiedPoints& points, const AnalyticMapperConfig& cfg) {
  const GridGeometry& g = belief.geometry;
  for (const ObservedPoint& p : points.free) {
    const Cell c = g.cell_of(p.point);
    if (belief.in_bounds(c)) belief.scores[c] *= cfg.free_discount;
  }
  Grid<double> increments(g.width, g.height, 0.0);
  for (const ObservedPoint& p : points.obstacle) {
    const Cell c = g.cell_of(p.point);
    if (belief.in_bounds(c) && p.distance > 0.0) increments[c] += cfg.obstacle_gain / p.distance;
  }
  for (double& w : increments.raw()) w = std::min(w, cfg.increment_cap);
  spread_obstacle_increments(belief.scores, increments, cfg.spread_fraction);
  for (double& s : belief.scores.raw()) s = std::clamp(s, 0.0, 1.0);
}

std::optional<Cell> detect_collision(Action commanded, const RigidTransform2D& estimated, const Pose2D& belief_pose,
                                     const ActionSpace& space, const GridGeometry& geometry,
                                     double threshold_fraction) {
  if (commanded != Action::Forward) return std::nullopt;
  const double shortfall = space.forward_step - estimated.translation_norm();
  if (shortfall <= threshold_fraction * space.forward_step) return std::nullopt;
  Cell ahead;
  if (space.mode == WorldMode::Discrete) {
    ahead = geometry.cell_of(belief_pose.position()) + kDirections4[quarter_turns(belief_pose.heading)];
  } else {
    ahead = geometry.cell_of(belief_pose.position() + space.forward_step * unit(belief_pose.heading));
  }
  if (!geometry.in_bounds(ahead)) return std::nullopt;
  return ahead;
}

void update_collision(OccupancyBelief& belief, Cell obstacle) {
  if (!belief.in_bounds(obstacle)) throw NavError(ErrorCode::InvalidArgument, "collision cell out of bounds");
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      const Cell c{obstacle.x + dx, obstacle.y + dy};
      if (!belief.in_bounds(c)) continue;
      double w = 0.1;
      if (dx == 0 && dy == 0) {
        w = 1.0;
      } else if (std::abs(dx) + std::abs(dy) == 1) {
        w = 0.5;
      } else if (std::abs(dx) == 1 && std::abs(dy) == 1) {
        w = 0.25;
      }
      belief.scores[c] = dx == 0 && dy == 0 ? 1.0 : std::max(belief.scores[c], w);
    }
  }
}

void update_traversal(DirectionalTraversal& maps, Cell from, Cell to, bool blocked) {
  const int dx = to.x - from.x;
  const int dy = to.y - from.y;
  if (std::abs(dx) + std::abs(dy) != 1) throw NavError(ErrorCode::InvalidMove, "cells are not 4-adjacent");
  Grid<std::uint8_t>& target = dx != 0 ? maps.horizontal : maps.vertical;
  if (!target.in_bounds(to)) throw NavError(ErrorCode::InvalidMove, "target cell out of bounds");
  target[to] = blocked ? 1 : 0;
}

}  // namespace navlab
