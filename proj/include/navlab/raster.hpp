#pragma once

// Exact grid traversal of a line segment (Amanatides & Woo). Used for range
// sensing, swept-motion collision checks, line-of-sight and visibility so
// that all of them agree on which cells a segment touches.

#include <cmath>
#include <limits>

#include "navlab/core.hpp"

namespace navlab {

/// Visits the cells crossed by segment a->b in order, passing the segment
/// parameter t in [0,1] at which each cell is entered. When the segment passes
/// exactly through a cell corner, both side cells are reported (at the same t)
/// before the diagonal cell, so diagonal gaps between two blocked cells are
/// never slipped through. Out-of-bounds cells are reported too; the visitor
/// decides. Returning false from the visitor stops the walk.
template <typename Visitor>
void traverse_segment(const GridGeometry& geom, Vec2 a, Vec2 b, Visitor&& visit) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kCornerTol = 1e-10;

  const double ax = (a.x - geom.origin.x) / geom.cell_size;
  const double ay = (a.y - geom.origin.y) / geom.cell_size;
  const double dx = (b.x - geom.origin.x) / geom.cell_size - ax;
  const double dy = (b.y - geom.origin.y) / geom.cell_size - ay;

  Cell cell{static_cast<int>(std::floor(ax)), static_cast<int>(std::floor(ay))};
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const double delta_x = step_x != 0 ? 1.0 / std::abs(dx) : kInf;
  const double delta_y = step_y != 0 ? 1.0 / std::abs(dy) : kInf;
  double next_x = step_x > 0 ? (cell.x + 1 - ax) / dx : (step_x < 0 ? (ax - cell.x) / -dx : kInf);
  double next_y = step_y > 0 ? (cell.y + 1 - ay) / dy : (step_y < 0 ? (ay - cell.y) / -dy : kInf);

  if (!visit(cell, 0.0)) return;
  while (true) {
    const double t = std::min(next_x, next_y);
    if (t > 1.0) return;
    if (std::abs(next_x - next_y) <= kCornerTol) {
      if (!visit(Cell{cell.x + step_x, cell.y}, t)) return;
      if (!visit(Cell{cell.x, cell.y + step_y}, t)) return;
      cell.x += step_x;
      cell.y += step_y;
      next_x += delta_x;
      next_y += delta_y;
    } else if (next_x < next_y) {
      cell.x += step_x;
      next_x += delta_x;
    } else {
      cell.y += step_y;
      next_y += delta_y;
    }
    if (!visit(cell, t)) return;
  }
}

}  // namespace navlab
