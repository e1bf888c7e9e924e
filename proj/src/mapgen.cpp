#include "navlab/mapgen.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>

#include "navlab/planner.hpp"

namespace navlab {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(seed);
  h = mix(h ^ a);
  h = mix(h ^ b);
  h = mix(h ^ c);
  return h;
}

MapSpec MapSpec::continuous_default() { return {}; }

MapSpec MapSpec::discrete_default() {
  MapSpec s;
  s.mode = WorldMode::Discrete;
  s.cell_size = 0.8;
  s.room_size_min = 3;
  s.room_size_max = 6;
  s.door_width = 1;
  s.clutter_min = 0;
  s.clutter_max = 1;
  s.clutter_size_min = 1;
  s.clutter_size_max = 1;
  s.clearance = 0;
  s.success_radius = 0.0;
  return s;
}

void MapSpec::validate() const {
  auto bad = [](const char* what) { throw NavError(ErrorCode::InvalidArgument, what); };
  if (!(cell_size > 0.0)) bad("cell_size must be positive");
  if (rooms_min < 2 || rooms_max < rooms_min) bad("need 2 <= rooms_min <= rooms_max");
  if (room_size_min < 3 || room_size_max < room_size_min) bad("need 3 <= room_size_min <= room_size_max");
  if (door_width < 1) bad("door_width must be >= 1");
  if (clutter_min < 0 || clutter_max < clutter_min) bad("bad clutter count range");
  if (clutter_size_min < 1 || clutter_size_max < clutter_size_min) bad("bad clutter size range");
  if (clearance < 0) bad("clearance must be >= 0");
  if (episodes < 0) bad("episodes must be >= 0");
  if (budget < 1) bad("budget must be >= 1");
  if (extra_door_prob < 0.0 || extra_door_prob > 1.0) bad("extra_door_prob must be in [0,1]");
}

bool is_connected(const GroundTruthMap& map) {
  Grid<std::uint8_t> seen(map.width(), map.height(), 0);
  std::size_t total = 0;
  Cell first{-1, -1};
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (!map.is_free({x, y})) continue;
      ++total;
      if (first.x < 0) first = {x, y};
    }
  }
  if (total == 0) return false;
  std::vector<Cell> stack{first};
  seen[first] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    for (Cell d : kDirections4) {
      const Cell n = c + d;
      if (map.is_free(n) && !seen[n]) {
        seen[n] = 1;
        ++reached;
        stack.push_back(n);
      }
    }
  }
  return reached == total;
}

namespace {

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

struct Adjacency {
  int a;
  int b;
  bool vertical_wall;  // wall runs north-south (rooms side by side)
  int fixed;           // wall x (vertical_wall) or wall y
  int lo;              // first interior coordinate along the wall
  int hi;              // last interior coordinate along the wall
};

int find_root(std::vector<int>& parent, int i) {
  while (parent[static_cast<std::size_t>(i)] != i) i = parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
  return i;
}

std::optional<GeneratedMap> try_generate(const MapSpec& spec, Rng& rng) {
  const int n = uniform_int(rng, spec.rooms_min, spec.rooms_max);
  int cols = 1;
  while (cols * cols < n) ++cols;
  int rows = (n + cols - 1) / cols;
  if (rows > 1 && std::bernoulli_distribution(0.5)(rng)) std::swap(cols, rows);
  if (rows * cols < n) return std::nullopt;

  std::vector<int> col_w(static_cast<std::size_t>(cols));
  std::vector<int> row_h(static_cast<std::size_t>(rows));
  for (int& w : col_w) w = uniform_int(rng, spec.room_size_min, spec.room_size_max);
  for (int& h : row_h) h = uniform_int(rng, spec.room_size_min, spec.room_size_max);
  const int width = std::accumulate(col_w.begin(), col_w.end(), 0) + cols + 1;
  const int height = std::accumulate(row_h.begin(), row_h.end(), 0) + rows + 1;
  if ((spec.max_width > 0 && width > spec.max_width) || (spec.max_height > 0 && height > spec.max_height)) {
    return std::nullopt;
  }
  std::vector<int> x0(static_cast<std::size_t>(cols));
  std::vector<int> y0(static_cast<std::size_t>(rows));
  for (int i = 0, x = 1; i < cols; x += col_w[static_cast<std::size_t>(i)] + 1, ++i) x0[static_cast<std::size_t>(i)] = x;
  for (int j = 0, y = 1; j < rows; y += row_h[static_cast<std::size_t>(j)] + 1, ++j) y0[static_cast<std::size_t>(j)] = y;

  // Layout slot (i, j) -> room id; surplus slots join the last room.
  auto slot_room = [&](int i, int j) { return std::min(j * cols + i, n - 1); };

  Grid<CellKind> cells(width, height, CellKind::Wall);
  GeneratedMap g;
  g.rooms = Grid<int>(width, height, -1);
  g.doors = Grid<std::uint8_t>(width, height, 0);
  g.room_count = n;
  g.mode = spec.mode;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      for (int y = y0[uj]; y < y0[uj] + row_h[uj]; ++y) {
        for (int x = x0[ui]; x < x0[ui] + col_w[ui]; ++x) {
          cells[Cell{x, y}] = CellKind::Free;
          g.rooms[Cell{x, y}] = slot_room(i, j);
        }
      }
    }
  }

  std::vector<Adjacency> adj;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      if (i + 1 < cols) {
        adj.push_back({slot_room(i, j), slot_room(i + 1, j), true, x0[ui + 1] - 1, y0[uj], y0[uj] + row_h[uj] - 1});
      }
      if (j + 1 < rows) {
        adj.push_back({slot_room(i, j), slot_room(i, j + 1), false, y0[uj + 1] - 1, x0[ui], x0[ui] + col_w[ui] - 1});
      }
    }
  }

  auto wall_cell = [](const Adjacency& a, int t) { return a.vertical_wall ? Cell{a.fixed, t} : Cell{t, a.fixed}; };
  auto open_span = [&](const Adjacency& a, int from, int to, bool door) {
    for (int t = from; t <= to; ++t) {
      const Cell c = wall_cell(a, t);
      cells[c] = CellKind::Free;
      g.rooms[c] = a.a;
      if (door) g.doors[c] = 1;
    }
  };

  std::shuffle(adj.begin(), adj.end(), rng);
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  for (const Adjacency& a : adj) {
    if (a.a == a.b) {
      open_span(a, a.lo, a.hi, false);
      continue;
    }
    const int ra = find_root(parent, a.a);
    const int rb = find_root(parent, a.b);
    const bool tree = ra != rb;
    if (!tree && !std::bernoulli_distribution(spec.extra_door_prob)(rng)) continue;
    if (tree) parent[static_cast<std::size_t>(ra)] = rb;
    const int span = a.hi - a.lo + 1;
    const int w = std::min(spec.door_width, span - 2);
    if (w < 1) return std::nullopt;
    const int start = uniform_int(rng, a.lo + 1, a.hi - w);
    open_span(a, start, start + w - 1, true);
  }
  // Merged slots leave wall stubs where their shared walls meet; clear them.
  for (int y = 1; y + 1 < height; ++y) {
    for (int x = 1; x + 1 < width; ++x) {
      const Cell c{x, y};
      if (cells[c] != CellKind::Wall) continue;
      int room = -2;
      bool uniform = true;
      for (Cell d : kDirections8) {
        const int r = g.rooms[c + d];
        if (r < 0) continue;
        if (room == -2) room = r;
        uniform = uniform && r == room;
      }
      const int ring = (g.rooms[c + Cell{1, 0}] >= 0) + (g.rooms[c + Cell{-1, 0}] >= 0) +
                       (g.rooms[c + Cell{0, 1}] >= 0) + (g.rooms[c + Cell{0, -1}] >= 0);
      if (uniform && room >= 0 && ring == 4) {
        cells[c] = CellKind::Free;
        g.rooms[c] = room;
      }
    }
  }

  // Door neighbourhoods stay clear of clutter.
  Grid<std::uint8_t> keep_clear(width, height, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (!g.doors[Cell{x, y}]) continue;
      for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) {
          const Cell c{x + dx, y + dy};
          if (keep_clear.in_bounds(c)) keep_clear[c] = 1;
        }
      }
    }
  }

  GroundTruthMap probe(cells, spec.cell_size);
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      const int count = uniform_int(rng, spec.clutter_min, spec.clutter_max);
      for (int k = 0; k < count; ++k) {
        for (int attempt = 0; attempt < 20; ++attempt) {
          const int sw = uniform_int(rng, spec.clutter_size_min, spec.clutter_size_max);
          const int sh = uniform_int(rng, spec.clutter_size_min, spec.clutter_size_max);
          const int margin = spec.mode == WorldMode::Discrete ? 1 : 3;
          const int xlo = x0[ui] + margin;
          const int xhi = x0[ui] + col_w[ui] - margin - sw;
          const int ylo = y0[uj] + margin;
          const int yhi = y0[uj] + row_h[uj] - margin - sh;
          if (xhi < xlo || yhi < ylo) break;
          const int bx = uniform_int(rng, xlo, xhi);
          const int by = uniform_int(rng, ylo, yhi);
          bool ok = true;
          for (int y = by - 1; y <= by + sh && ok; ++y) {
            for (int x = bx - 1; x <= bx + sw && ok; ++x) {
              ok = cells[Cell{x, y}] == CellKind::Free && !keep_clear[Cell{x, y}];
            }
          }
          if (!ok) continue;
          Grid<CellKind> trial = cells;
          for (int y = by; y < by + sh; ++y) {
            for (int x = bx; x < bx + sw; ++x) trial[Cell{x, y}] = CellKind::Obstacle;
          }
          if (!is_connected(GroundTruthMap(trial, spec.cell_size))) continue;
          cells = std::move(trial);
          break;
        }
      }
    }
  }
  g.map = GroundTruthMap(cells, spec.cell_size);
  if (!is_connected(g.map)) return std::nullopt;
  for (std::size_t i = 0; i < g.rooms.raw().size(); ++i) {
    if (g.map.cells().raw()[i] != CellKind::Free) g.rooms.raw()[i] = -1;
  }

  // Episode endpoints: free cells with clearance, never on a door.
  std::vector<Cell> candidates;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Cell c{x, y};
      if (!g.map.is_free(c) || g.doors[c]) continue;
      bool clear = true;
      for (int dy = -spec.clearance; dy <= spec.clearance && clear; ++dy) {
        for (int dx = -spec.clearance; dx <= spec.clearance && clear; ++dx) {
          clear = g.map.is_free(c + Cell{dx, dy});
        }
      }
      if (clear) candidates.push_back(c);
    }
  }
  if (candidates.size() < 2) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  for (int e = 0; e < spec.episodes; ++e) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const Cell s = candidates[pick(rng)];
      const Cell t = candidates[pick(rng)];
      if (g.rooms[s] == g.rooms[t]) continue;
      Episode ep;
      const Vec2 sp = g.map.center_of(s);
      const double heading = spec.mode == WorldMode::Discrete
                                 ? uniform_int(rng, 0, 3) * (std::numbers::pi / 2.0)
                                 : std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
      ep.start = Pose2D(sp.x, sp.y, heading);
      ep.goal = g.map.center_of(t);
      ep.budget = spec.budget;
      ep.success_radius = spec.success_radius;
      if (!crosses_door(g, ep)) continue;
      g.episodes.push_back(ep);
      placed = true;
    }
    if (!placed) return std::nullopt;
  }
  return g;
}

}  // namespace

bool crosses_door(const GeneratedMap& g, const Episode& e) {
  const Grid<double> zero(g.map.width(), g.map.height(), 0.0);
  const Grid<std::uint8_t> mask = g.map.obstacle_mask();
  PlanOptions opt;
  opt.blocked = &mask;
  opt.allow_corner_cutting = false;
  opt.connectivity = g.mode == WorldMode::Discrete ? Connectivity::Four : Connectivity::Eight;
  try {
    const Plan p = weighted_astar(zero, g.map.cell_of(e.start.position()), g.map.cell_of(e.goal), opt);
    return std::any_of(p.waypoints.begin(), p.waypoints.end(), [&](Cell c) { return g.doors[c] != 0; });
  } catch (const NavError&) {
    return false;
  }
}

GeneratedMap generate_map(const MapSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, 0x6d6170));
  for (int attempt = 0; attempt < 100; ++attempt) {
    if (auto g = try_generate(spec, rng)) return std::move(*g);
  }
  throw NavError(ErrorCode::GenerationFailed, "no valid map after 100 attempts");
}

}  // namespace navlab
