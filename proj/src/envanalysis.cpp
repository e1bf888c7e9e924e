#include "navlab/envanalysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>

#include "navlab/planner.hpp"
#include "navlab/raster.hpp"

namespace navlab {

namespace {

constexpr double kMaxActions = 1e5;

bool segment_clear_of_walls(const GroundTruthMap& map, Cell from, Cell to) {
  bool clear = true;
  traverse_segment(map.geometry(), map.center_of(from), map.center_of(to), [&](Cell c, double) {
    if (c == to) return false;
    if (map.is_wall(c)) {
      clear = false;
      return false;
    }
    return true;
  });
  return clear;
}

std::vector<std::size_t> compute_visible(const GroundTruthMap& map, Cell from) {
  std::vector<std::size_t> out;
  const Grid<CellKind>& cells = map.cells();
  for (std::size_t i = 0; i < cells.raw().size(); ++i) {
    const Cell c = cells.cell_at(i);
    if (c == from || segment_clear_of_walls(map, from, c)) out.push_back(i);
  }
  return out;
}

}  // namespace

VisibilityMask visible_region(const GroundTruthMap& map, Vec2 position) {
  const Cell from = map.cell_of(position);
  if (!map.is_free(from)) throw NavError(ErrorCode::InvalidPosition, "viewpoint is not on a free cell");
  VisibilityMask mask(map.width(), map.height(), 0);
  for (std::size_t i : compute_visible(map, from)) mask.raw()[i] = 1;
  return mask;
}

const std::vector<std::size_t>& VisibilityCache::visible_from(Cell c) {
  if (!map_->is_free(c)) throw NavError(ErrorCode::InvalidPosition, "viewpoint is not on a free cell");
  const std::size_t key = map_->cells().index(c);
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, compute_visible(*map_, c)).first;
  return it->second;
}

FrontierSet compute_frontiers(const VisibilityMask& mask, const GroundTruthMap& map) {
  if (mask.width() != map.width() || mask.height() != map.height()) {
    throw NavError(ErrorCode::InvalidArgument, "visibility mask does not match the map");
  }
  FrontierSet out;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const Cell c{x, y};
      if (!map.is_free(c) || !mask[c]) continue;
      for (Cell d : kDirections4) {
        const Cell n = c + d;
        if (map.is_free(n) && !mask[n]) {
          out.push_back({c, 0});
          break;
        }
      }
    }
  }
  for (Frontier& f : out) {
    for (const Frontier& g : out) {
      if (!(g.cell == f.cell) && chebyshev(g.cell, f.cell) <= 2) ++f.crowding;
    }
  }
  return out;
}

Cell sample_subgoal(std::span<const Frontier> frontiers, Rng& rng) {
  if (frontiers.empty()) throw NavError(ErrorCode::NoFrontier, "no frontier to sample");
  double total = 0.0;
  for (const Frontier& f : frontiers) total += 1.0 / (1.0 + f.crowding);
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  for (const Frontier& f : frontiers) {
    acc += 1.0 / (1.0 + f.crowding);
    if (u < acc) return f.cell;
  }
  return frontiers.back().cell;
}

McProfile McProfile::for_world(const GroundTruthMap& map, const ActionSpace& space) {
  McProfile p;
  p.headings = space.mode == WorldMode::Continuous ? 8 : 4;
  p.translation_cost = map.cell_size() / space.forward_step;
  p.rotation_cost = 1.0;
  return p;
}

int McProfile::heading_index(double heading) const {
  const double sector = 2.0 * std::numbers::pi / headings;
  const long k = std::lround(wrap_two_pi(heading) / sector);
  return static_cast<int>(((k % headings) + headings) % headings);
}

Cell McProfile::direction(int heading) const {
  return headings == 8 ? kDirections8[static_cast<std::size_t>(heading)]
                       : kDirections4[static_cast<std::size_t>(heading)];
}

ActionPlan plan_actions(const Grid<std::uint8_t>& allowed, Cell start, int heading, Cell goal,
                        const McProfile& profile) {
  const int H = profile.headings;
  if (heading < 0 || heading >= H) throw NavError(ErrorCode::InvalidArgument, "heading index out of range");
  auto ok = [&](Cell c) { return allowed.in_bounds(c) && allowed[c] != 0; };
  if (!ok(start) || !ok(goal)) throw NavError(ErrorCode::NoPath, "start or goal not allowed");

  const std::size_t n = allowed.raw().size() * static_cast<std::size_t>(H);
  auto state = [&](Cell c, int h) { return allowed.index(c) * static_cast<std::size_t>(H) + static_cast<std::size_t>(h); };
  auto heuristic = [&](Cell c) {
    const int dx = std::abs(c.x - goal.x);
    const int dy = std::abs(c.y - goal.y);
    return profile.translation_cost * (H == 8 ? std::max(dx, dy) : dx + dy);
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> g(n, kInf);
  std::vector<std::size_t> parent(n, n);
  std::vector<std::uint8_t> via(n, 0);
  std::vector<std::uint8_t> closed(n, 0);
  using Entry = std::tuple<double, double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const std::size_t s0 = state(start, heading);
  g[s0] = 0.0;
  open.push({heuristic(start), heuristic(start), s0});

  std::size_t found = n;
  while (!open.empty()) {
    const auto [f, h, s] = open.top();
    open.pop();
    if (closed[s]) continue;
    closed[s] = 1;
    const Cell c = allowed.cell_at(s / static_cast<std::size_t>(H));
    const int hd = static_cast<int>(s % static_cast<std::size_t>(H));
    if (c == goal) {
      found = s;
      break;
    }
    auto relax = [&](Cell nc, int nh, double cost, Action a) {
      const std::size_t ns = state(nc, nh);
      const double ng = g[s] + cost;
      if (closed[ns] || !(ng < g[ns])) return;
      g[ns] = ng;
      parent[ns] = s;
      via[ns] = static_cast<std::uint8_t>(a);
      const double nh2 = heuristic(nc);
      open.push({ng + nh2, nh2, ns});
    };
    relax(c, (hd + 1) % H, profile.rotation_cost, Action::RotateLeft);
    relax(c, (hd + H - 1) % H, profile.rotation_cost, Action::RotateRight);
    const Cell d = profile.direction(hd);
    const Cell nc = c + d;
    if (ok(nc) && (d.x == 0 || d.y == 0 || (ok(Cell{nc.x, c.y}) && ok(Cell{c.x, nc.y})))) {
      relax(nc, hd, profile.translation_cost, Action::Forward);
    }
  }
  if (found == n) throw NavError(ErrorCode::NoPath, "no action sequence reaches the goal");

  ActionPlan plan;
  plan.cost = g[found];
  plan.final_heading = static_cast<int>(found % static_cast<std::size_t>(H));
  std::vector<std::size_t> chain;
  for (std::size_t s = found; s != s0; s = parent[s]) chain.push_back(s);
  std::reverse(chain.begin(), chain.end());
  plan.cells.push_back(start);
  for (std::size_t s : chain) {
    plan.actions.push_back(static_cast<Action>(via[s]));
    plan.cells.push_back(allowed.cell_at(s / static_cast<std::size_t>(H)));
  }
  return plan;
}

namespace {

Grid<std::uint8_t> free_mask(const GroundTruthMap& map) {
  Grid<std::uint8_t> m(map.width(), map.height(), 0);
  for (std::size_t i = 0; i < m.raw().size(); ++i) m.raw()[i] = map.cells().raw()[i] == CellKind::Free ? 1 : 0;
  return m;
}

}  // namespace

double optimal_action_cost(const GroundTruthMap& map, const Episode& episode, const McProfile& profile) {
  const Cell s = map.cell_of(episode.start.position());
  const Cell goal = map.cell_of(episode.goal);
  if (!map.is_free(s) || !map.is_free(goal)) throw NavError(ErrorCode::InvalidPosition, "start or goal not free");
  try {
    return plan_actions(free_mask(map), s, profile.heading_index(episode.start.heading), goal, profile).cost;
  } catch (const NavError& e) {
    if (e.code() == ErrorCode::NoPath) throw NavError(ErrorCode::Unreachable, "goal unreachable from start");
    throw;
  }
}

double run_2dmc(const GroundTruthMap& map, const Episode& episode, const McProfile& profile, Rng& rng,
                VisibilityCache* cache, McAudit* audit) {
  VisibilityCache local(map);
  VisibilityCache& vis = cache != nullptr ? *cache : local;
  Cell cur = map.cell_of(episode.start.position());
  const Cell goal = map.cell_of(episode.goal);
  if (!map.is_free(cur) || !map.is_free(goal)) throw NavError(ErrorCode::InvalidPosition, "start or goal not free");
  int heading = profile.heading_index(episode.start.heading);

  VisibilityMask observed(map.width(), map.height(), 0);
  Grid<std::uint8_t> allowed(map.width(), map.height(), 0);
  auto observe = [&](Cell c) {
    for (std::size_t i : vis.visible_from(c)) {
      observed.raw()[i] = 1;
      if (map.cells().raw()[i] == CellKind::Free) allowed.raw()[i] = 1;
    }
  };
  observe(cur);

  double cost = 0.0;
  std::size_t actions = 0;
  auto record = [&](const ActionPlan& p) {
    if (audit == nullptr) return;
    audit->plans.push_back(p.cells);
    audit->observed_at_plan.push_back(observed);
  };

  auto goal_plannable = [&] {
    try {
      plan_actions(allowed, cur, heading, goal, profile);
      return true;
    } catch (const NavError& e) {
      if (e.code() != ErrorCode::NoPath) throw;
      return false;
    }
  };

  while (true) {
    if (cur == goal) return cost;
    if (observed[goal]) {
      try {
        const ActionPlan p = plan_actions(allowed, cur, heading, goal, profile);
        record(p);
        actions += p.actions.size();
        if (static_cast<double>(actions) > kMaxActions) throw NavError(ErrorCode::BudgetExceeded, "exploration budget exceeded");
        return cost + p.cost;
      } catch (const NavError& e) {
        if (e.code() != ErrorCode::NoPath) throw;
      }
    }

    // Frontiers reachable through observed free space.
    const FrontierSet all = compute_frontiers(observed, map);
    FrontierSet reachable;
    {
      Grid<std::uint8_t> seen(map.width(), map.height(), 0);
      std::vector<Cell> stack{cur};
      seen[cur] = 1;
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        for (Cell d : kDirections4) {
          const Cell nb = c + d;
          if (allowed.in_bounds(nb) && allowed[nb] && !seen[nb]) {
            seen[nb] = 1;
            stack.push_back(nb);
          }
        }
      }
      for (const Frontier& f : all) {
        if (seen[f.cell]) reachable.push_back(f);
      }
    }
    if (reachable.empty()) throw NavError(ErrorCode::Unreachable, "goal not reachable by exploration");
    const Cell subgoal = sample_subgoal(reachable, rng);
    const ActionPlan p = plan_actions(allowed, cur, heading, subgoal, profile);
    record(p);

    for (std::size_t i = 0; i < p.actions.size(); ++i) {
      const Action a = p.actions[i];
      ++actions;
      if (a == Action::Forward) {
        cost += profile.translation_cost;
        cur = p.cells[i + 1];
        observe(cur);
      } else {
        cost += profile.rotation_cost;
        heading = a == Action::RotateLeft ? (heading + 1) % profile.headings
                                          : (heading + profile.headings - 1) % profile.headings;
      }
      if (static_cast<double>(actions) > kMaxActions) throw NavError(ErrorCode::BudgetExceeded, "exploration budget exceeded");
      if (observed[goal] && goal_plannable()) break;
    }
  }
}

AmbiguityResult ambiguity_score(const GroundTruthMap& map, const Episode& episode, const McProfile& profile, Rng& rng,
                                int runs) {
  if (runs < 1) throw NavError(ErrorCode::InvalidArgument, "runs must be positive");
  AmbiguityResult r;
  r.optimal_steps = optimal_action_cost(map, episode, profile);
  VisibilityCache cache(map);
  for (int i = 0; i < runs; ++i) {
    Rng run_rng(rng());
    r.run_counts.push_back(run_2dmc(map, episode, profile, run_rng, &cache));
  }
  r.n_mc = median(r.run_counts);
  if (!(r.optimal_steps > 0.0)) throw NavError(ErrorCode::Undefined, "start and goal share a cell");
  r.score = r.n_mc / r.optimal_steps;
  return r;
}

int count_turns(std::span<const Cell> path) {
  int turns = 0;
  for (std::size_t i = 2; i < path.size(); ++i) {
    const Cell a{path[i - 1].x - path[i - 2].x, path[i - 1].y - path[i - 2].y};
    const Cell b{path[i].x - path[i - 1].x, path[i].y - path[i - 1].y};
    if (!(a == b)) ++turns;
  }
  return turns;
}

int complexity(const GroundTruthMap& map, const Episode& episode, WorldMode mode) {
  const Grid<double> zero(map.width(), map.height(), 0.0);
  const Grid<std::uint8_t> mask = map.obstacle_mask();
  PlanOptions opt;
  opt.connectivity = mode == WorldMode::Continuous ? Connectivity::Eight : Connectivity::Four;
  opt.blocked = &mask;
  opt.allow_corner_cutting = false;
  try {
    const Plan p = weighted_astar(zero, map.cell_of(episode.start.position()), map.cell_of(episode.goal), opt);
    return count_turns(p.waypoints);
  } catch (const NavError& e) {
    if (e.code() == ErrorCode::NoPath) throw NavError(ErrorCode::Unreachable, "goal unreachable from start");
    throw;
  }
}

}  // namespace navlab
