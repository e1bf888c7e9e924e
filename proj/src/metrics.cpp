#include "navlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <set>

namespace navlab {

void MetricsConfig::validate() const {
  if (!(delta > 0.0 && delta < epsilon)) throw NavError(ErrorCode::InvalidArgument, "need 0 < delta < epsilon");
  if (!(bin_size > 0.0)) throw NavError(ErrorCode::InvalidArgument, "bin_size must be positive");
}

double collision_frequency(const Trajectory& traj) {
  int forwards = 0;
  int collisions = 0;
  for (const StepRecord& s : traj.steps) {
    if (s.action != Action::Forward) continue;
    ++forwards;
    collisions += s.collided ? 1 : 0;
  }
  return forwards == 0 ? 0.0 : 100.0 * collisions / forwards;
}

double short_term_thrashing(const Trajectory& traj) {
  const auto& s = traj.steps;
  int collisions = 0;
  int repeats = 0;
  for (std::size_t t = 0; t < s.size(); ++t) {
    if (!s[t].collided) continue;
    ++collisions;
    if (t + 1 < s.size() && s[t].action == s[t + 1].action) ++repeats;
  }
  return collisions == 0 ? 0.0 : 100.0 * repeats / collisions;
}

double long_term_thrashing(const Trajectory& traj, const MetricsConfig& cfg) {
  const std::vector<Vec2> l = traj.locations();
  int moves = 0;
  int novel = 0;
  for (std::size_t t = 0; t + 1 < l.size(); ++t) {
    if (!(distance(l[t], l[t + 1]) > cfg.delta)) continue;
    ++moves;
    bool fresh = true;
    for (std::size_t t2 = 0; t2 < t && fresh; ++t2) fresh = distance(l[t], l[t2]) > cfg.epsilon;
    novel += fresh ? 1 : 0;
  }
  return moves == 0 ? 0.0 : 100.0 * (1.0 - static_cast<double>(novel) / moves);
}

DistanceField::DistanceField(const GroundTruthMap& map, Vec2 goal, WorldMode mode)
    : map_(&map), cells_(map.width(), map.height(), std::numeric_limits<double>::infinity()) {
  const Cell g = map.cell_of(goal);
  if (!map.is_free(g)) throw NavError(ErrorCode::InvalidPosition, "goal is not on a free cell");
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  cells_[g] = 0.0;
  open.push({0.0, cells_.index(g)});
  const bool eight = mode == WorldMode::Continuous;
  const std::span<const Cell> dirs = eight ? std::span<const Cell>(kDirections8) : std::span<const Cell>(kDirections4);
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    const Cell c = cells_.cell_at(idx);
    if (d > cells_[c]) continue;
    for (Cell dir : dirs) {
      const Cell n = c + dir;
      if (!map.is_free(n)) continue;
      const bool diagonal = dir.x != 0 && dir.y != 0;
      if (diagonal && (!map.is_free(Cell{n.x, c.y}) || !map.is_free(Cell{c.x, n.y}))) continue;
      const double nd = d + (diagonal ? std::numbers::sqrt2 : 1.0);
      if (nd < cells_[n]) {
        cells_[n] = nd;
        open.push({nd, cells_.index(n)});
      }
    }
  }
}

bool DistanceField::reachable(Cell c) const { return cells_.in_bounds(c) && std::isfinite(cells_[c]); }

double DistanceField::cells_from(Cell c) const {
  if (!reachable(c)) throw NavError(ErrorCode::Unreachable, "goal unreachable from cell");
  return cells_[c];
}

double DistanceField::steps_from(Vec2 from, const ActionSpace& space) const {
  return cells_from(map_->cell_of(from)) * map_->cell_size() / space.forward_step;
}

double optimal_distance(const GroundTruthMap& map, Vec2 from, Vec2 goal, const ActionSpace& space) {
  if (!map.is_free(map.cell_of(from))) throw NavError(ErrorCode::InvalidPosition, "start is not on a free cell");
  return DistanceField(map, goal, space.mode).steps_from(from, space);
}

std::size_t observed_bin_count(const Trajectory& traj, double bin_size) {
  std::set<std::pair<long, long>> bins;
  for (const StepRecord& s : traj.steps) {
    for (const Vec2& p : s.observed_points) {
      bins.insert({std::lround(std::floor(p.x / bin_size)), std::lround(std::floor(p.y / bin_size))});
    }
  }
  return bins.size();
}

double exploitation(const Trajectory& traj, const GroundTruthMap& map, const MetricsConfig& cfg,
                    const ActionSpace& space) {
  const DistanceField field(map, traj.episode.goal, space.mode);
  const std::vector<Vec2> l = traj.locations();
  const double d0 = field.steps_from(l.front(), space);
  double best = d0;
  for (std::size_t i = 1; i < l.size(); ++i) best = std::min(best, field.steps_from(l[i], space));
  return static_cast<double>(observed_bin_count(traj, cfg.bin_size)) / (d0 - best + 1.0);
}

double spl(std::span<const EpisodeResult> results) {
  if (results.empty()) throw NavError(ErrorCode::Undefined, "SPL of an empty episode set");
  double sum = 0.0;
  for (const EpisodeResult& r : results) {
    if (!(r.optimal_length > 0.0)) throw NavError(ErrorCode::InvalidArgument, "optimal_length must be positive");
    if (r.success) sum += r.optimal_length / std::max(r.path_length_taken, r.optimal_length);
  }
  return sum / static_cast<double>(results.size());
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw NavError(ErrorCode::InvalidArgument, "need equal lengths >= 2");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NavError(ErrorCode::Undefined, "zero variance");
  return sxy / std::sqrt(sxx * syy);
}

EpisodeEvaluation evaluate_episode(const Trajectory& traj, const GroundTruthMap& map, const ActionSpace& space,
                                   const MetricsConfig& cfg) {
  EpisodeEvaluation e;
  e.steps = static_cast<int>(traj.steps.size());
  e.result.success = traj.final_status == FinalStatus::Success;
  e.result.path_length_taken = static_cast<double>(traj.steps.size());
  e.result.optimal_length = optimal_distance(map, traj.episode.start.position(), traj.episode.goal, space);
  e.result.final_distance = distance(traj.final_location, traj.episode.goal);
  e.collision_frequency = collision_frequency(traj);
  e.short_term_thrashing = short_term_thrashing(traj);
  e.long_term_thrashing = long_term_thrashing(traj, cfg);
  try {
    e.exploitation = exploitation(traj, map, cfg, space);
  } catch (const NavError&) {
    e.exploitation.reset();
  }
  const EpisodeResult one[] = {e.result};
  e.spl_term = e.result.optimal_length > 0.0 ? spl(one) : 0.0;
  return e;
}

MetricsReport summarize(const std::string& agent, double noise_level, std::span<const EpisodeEvaluation> evals) {
  if (evals.empty()) throw NavError(ErrorCode::InvalidArgument, "nothing to summarize");
  MetricsReport r;
  r.agent = agent;
  r.noise_level = noise_level;
  r.episodes = static_cast<int>(evals.size());
  const double n = static_cast<double>(evals.size());
  std::vector<double> me;
  int successes = 0;
  for (const EpisodeEvaluation& e : evals) {
    successes += e.result.success ? 1 : 0;
    r.avg_steps += e.steps;
    r.mean_final_distance += e.result.final_distance;
    r.collision_frequency += e.collision_frequency;
    r.short_term_thrashing += e.short_term_thrashing;
    r.long_term_thrashing += e.long_term_thrashing;
    r.spl += e.spl_term;
    if (e.exploitation) me.push_back(*e.exploitation);
  }
  r.success_rate = 100.0 * successes / n;
  r.avg_steps /= n;
  r.mean_final_distance /= n;
  r.collision_frequency /= n;
  r.short_term_thrashing /= n;
  r.long_term_thrashing /= n;
  r.spl /= n;
  if (!me.empty()) {
    r.exploitation_median = median(me);
    double sum = 0.0;
    for (double v : me) sum += v;
    r.exploitation_mean = sum / static_cast<double>(me.size());
  }
  return r;
}

}  // namespace navlab
