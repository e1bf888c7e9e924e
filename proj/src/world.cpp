#include "navlab/world.hpp"

#include <algorithm>
#include <cmath>

#include "navlab/raster.hpp"

namespace navlab {

GroundTruthMap::GroundTruthMap(Grid<CellKind> cells, double cell_size)
    : cells_(std::move(cells)), cell_size_(cell_size) {
  if (!(cell_size_ > 0.0)) throw NavError(ErrorCode::InvalidArgument, "cell_size must be positive");
  const int w = cells_.width();
  const int h = cells_.height();
  bool any_free = false;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
      const CellKind k = cells_[Cell{x, y}];
      if (border && k != CellKind::Wall) throw NavError(ErrorCode::InvalidArgument, "map border must be wall");
      any_free = any_free || k == CellKind::Free;
    }
  }
  if (!any_free) throw NavError(ErrorCode::InvalidArgument, "map has no free cell");
}

GroundTruthMap GroundTruthMap::from_ascii(const std::vector<std::string>& rows, double cell_size) {
  if (rows.empty() || rows.front().empty()) throw NavError(ErrorCode::ParseError, "empty map grid");
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.front().size());
  Grid<CellKind> cells(w, h);
  for (int r = 0; r < h; ++r) {
    if (static_cast<int>(rows[r].size()) != w) throw NavError(ErrorCode::ParseError, "ragged map row");
    for (int x = 0; x < w; ++x) {
      CellKind k{};
      switch (rows[r][x]) {
        case '#': k = CellKind::Wall; break;
        case 'X': k = CellKind::Obstacle; break;
        case '.': k = CellKind::Free; break;
        default: throw NavError(ErrorCode::ParseError, std::string("unknown map symbol '") + rows[r][x] + "'");
      }
      cells[Cell{x, h - 1 - r}] = k;
    }
  }
  return GroundTruthMap(std::move(cells), cell_size);
}

std::vector<std::string> GroundTruthMap::to_ascii() const {
  std::vector<std::string> rows;
  rows.reserve(height());
  for (int y = height() - 1; y >= 0; --y) {
    std::string row(width(), '.');
    for (int x = 0; x < width(); ++x) {
      const CellKind k = cells_[Cell{x, y}];
      row[x] = k == CellKind::Wall ? '#' : (k == CellKind::Obstacle ? 'X' : '.');
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Grid<std::uint8_t> GroundTruthMap::obstacle_mask() const {
  Grid<std::uint8_t> mask(width(), height(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) mask.raw()[i] = cells_.raw()[i] != CellKind::Free ? 1 : 0;
  return mask;
}

const char* to_string(Action a) {
  switch (a) {
    case Action::Forward: return "Forward";
    case Action::RotateLeft: return "RotateLeft";
    case Action::RotateRight: return "RotateRight";
    case Action::Stay: return "Stay";
  }
  return "?";
}

Action action_from_string(const std::string& s) {
  if (s == "Forward") return Action::Forward;
  if (s == "RotateLeft") return Action::RotateLeft;
  if (s == "RotateRight") return Action::RotateRight;
  if (s == "Stay") return Action::Stay;
  throw NavError(ErrorCode::ParseError, "unknown action '" + s + "'");
}

const char* to_string(WorldMode m) { return m == WorldMode::Continuous ? "continuous" : "discrete"; }

WorldMode mode_from_string(const std::string& s) {
  if (s == "continuous") return WorldMode::Continuous;
  if (s == "discrete") return WorldMode::Discrete;
  throw NavError(ErrorCode::ParseError, "unknown mode '" + s + "'");
}

ActionSpace ActionSpace::continuous() { return {WorldMode::Continuous, 0.2, kTwoPi / 50.0, false}; }

ActionSpace ActionSpace::discrete() { return {WorldMode::Discrete, 0.8, kTwoPi / 4.0, true}; }

void ActionSpace::validate() const {
  if (!(forward_step > 0.0)) throw NavError(ErrorCode::InvalidArgument, "forward_step must be positive");
  if (!(turn_step > 0.0)) throw NavError(ErrorCode::InvalidArgument, "turn_step must be positive");
  if (mode == WorldMode::Discrete) {
    const double k = kTwoPi / turn_step;
    if (std::abs(k - std::round(k)) > 1e-9) throw NavError(ErrorCode::InvalidArgument, "turn_step must divide 2*pi");
  }
}

std::vector<Action> ActionSpace::actions() const {
  std::vector<Action> out{Action::Forward, Action::RotateLeft, Action::RotateRight};
  if (has_stay) out.push_back(Action::Stay);
  return out;
}

bool ActionSpace::contains(Action a) const { return a != Action::Stay || has_stay; }

RigidTransform2D ActionSpace::nominal_motion(Action a) const {
  switch (a) {
    case Action::Forward: return {forward_step, 0.0, 0.0};
    case Action::RotateLeft: return {0.0, 0.0, turn_step};
    case Action::RotateRight: return {0.0, 0.0, -turn_step};
    case Action::Stay: return {};
  }
  return {};
}

void SensorConfig::validate() const {
  if (ray_count < 2) throw NavError(ErrorCode::InvalidArgument, "ray_count must be >= 2");
  if (!(max_range > 0.0)) throw NavError(ErrorCode::InvalidArgument, "max_range must be positive");
  if (!(fov > 0.0) || fov > kTwoPi) throw NavError(ErrorCode::InvalidArgument, "fov must be in (0, 2*pi]");
  if (!(noise_level >= 0.0)) throw NavError(ErrorCode::InvalidArgument, "noise_level must be >= 0");
}

std::vector<Vec2> RangeScan::points() const {
  std::vector<Vec2> pts;
  pts.reserve(ranges.size());
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (is_max_range(ranges[i])) continue;
    pts.push_back(ranges[i] * unit(bearings[i]));
  }
  return pts;
}

PhysicsConfig PhysicsConfig::for_mode(WorldMode mode) {
  if (mode == WorldMode::Discrete) return {0.0, 0.0};
  return {0.01, 0.02};
}

void PhysicsConfig::validate() const {
  if (!(slip_sigma >= 0.0)) throw NavError(ErrorCode::InvalidArgument, "slip_sigma must be >= 0");
  if (!(pushback_stop_margin >= 0.0)) throw NavError(ErrorCode::InvalidArgument, "pushback_stop_margin must be >= 0");
}

namespace {

/// Parameter in [0,1] at which segment a->b first enters an obstacle cell, or
/// a value > 1 if it never does.
double first_obstacle_entry(const GroundTruthMap& map, Vec2 a, Vec2 b) {
  double hit = 2.0;
  traverse_segment(map.geometry(), a, b, [&](Cell c, double t) {
    if (map.is_obstacle(c)) {
      hit = t;
      return false;
    }
    return true;
  });
  return hit;
}

}  // namespace

double cast_ray(const GroundTruthMap& map, Vec2 origin, double angle, double max_range) {
  const Vec2 end = origin + max_range * unit(angle);
  const double t = first_obstacle_entry(map, origin, end);
  if (t > 1.0) return std::numeric_limits<double>::infinity();
  return t * max_range;
}

RangeScan raycast_scan(const GroundTruthMap& map, const Pose2D& pose, const SensorConfig& cfg, double forward_step,
                       Rng& rng) {
  cfg.validate();
  if (!map.is_free(map.cell_of(pose.position()))) throw NavError(ErrorCode::InvalidPose, "sensor pose is not on a free cell");
  RangeScan scan;
  scan.max_range = cfg.max_range;
  scan.ranges.resize(cfg.ray_count);
  scan.bearings.resize(cfg.ray_count);
  for (int i = 0; i < cfg.ray_count; ++i) {
    const double bearing = cfg.fov * (static_cast<double>(i) / (cfg.ray_count - 1) - 0.5);
    scan.bearings[i] = bearing;
    scan.ranges[i] = cast_ray(map, pose.position(), pose.heading + bearing, cfg.max_range);
  }
  if (cfg.noise_level > 0.0) return apply_noise(scan, cfg.noise_level, forward_step, rng);
  return scan;
}

RangeScan apply_noise(const RangeScan& scan, double level, double forward_step, Rng& rng) {
  if (level < 0.0) throw NavError(ErrorCode::InvalidArgument, "noise level must be >= 0");
  if (level == 0.0) return scan;
  constexpr double kMinRange = 1e-6;
  std::normal_distribution<double> gauss(0.0, noise_sigma(level, forward_step));
  RangeScan out = scan;
  for (double& r : out.ranges) {
    if (RangeScan::is_max_range(r)) continue;
    r = std::clamp(r + gauss(rng), kMinRange, scan.max_range);
  }
  return out;
}

StepOutcome step_continuous(const GroundTruthMap& map, const Pose2D& pose, Action action, const ActionSpace& space,
                            const PhysicsConfig& physics, Rng& rng) {
  StepOutcome out{pose, false, {}};
  switch (action) {
    case Action::RotateLeft: out.new_pose = Pose2D(pose.x, pose.y, pose.heading + space.turn_step); break;
    case Action::RotateRight: out.new_pose = Pose2D(pose.x, pose.y, pose.heading - space.turn_step); break;
    case Action::Stay: break;
    case Action::Forward: {
      double travel = space.forward_step;
      if (physics.slip_sigma > 0.0) {
        std::normal_distribution<double> slip(0.0, physics.slip_sigma);
        travel += slip(rng);
      }
      travel = std::max(travel, 0.0);
      const Vec2 dir = unit(pose.heading);
      const Vec2 from = pose.position();
      const double t = first_obstacle_entry(map, from, from + travel * dir);
      if (t <= 1.0) {
        travel = std::max(0.0, t * travel - physics.pushback_stop_margin);
        out.collided = true;
      }
      const Vec2 to = from + travel * dir;
      out.new_pose = Pose2D(to.x, to.y, pose.heading);
      break;
    }
  }
  out.achieved_transform = relative(pose, out.new_pose);
  return out;
}

int quarter_turns(double heading) {
  const long k = std::lround(wrap_two_pi(heading) / (std::numbers::pi / 2.0));
  return static_cast<int>(((k % 4) + 4) % 4);
}

StepOutcome step_discrete(const GroundTruthMap& map, const Pose2D& pose, Action action, const ActionSpace& space) {
  const int k = quarter_turns(pose.heading);
  const Cell cell = map.cell_of(pose.position());
  auto pose_at = [&](Cell c, int quarter) {
    const Vec2 p = map.center_of(c);
    return Pose2D(p.x, p.y, quarter * (std::numbers::pi / 2.0));
  };
  const Pose2D snapped = pose_at(cell, k);
  StepOutcome out{snapped, false, {}};
  const int turn = static_cast<int>(std::lround(space.turn_step / (std::numbers::pi / 2.0)));
  switch (action) {
    case Action::RotateLeft: out.new_pose = pose_at(cell, ((k + turn) % 4 + 4) % 4); break;
    case Action::RotateRight: out.new_pose = pose_at(cell, ((k - turn) % 4 + 4) % 4); break;
    case Action::Stay: break;
    case Action::Forward: {
      const Cell next = cell + kDirections4[k];
      if (map.is_free(next)) {
        out.new_pose = pose_at(next, k);
      } else {
        out.collided = true;
      }
      break;
    }
  }
  out.achieved_transform = relative(snapped, out.new_pose);
  return out;
}

StepOutcome step_world(const GroundTruthMap& map, const Pose2D& pose, Action action, const ActionSpace& space,
                       const PhysicsConfig& physics, Rng& rng) {
  if (space.mode == WorldMode::Discrete) return step_discrete(map, pose, action, space);
  return step_continuous(map, pose, action, space, physics, rng);
}

GoalObservation goal_signal(const Pose2D& pose, Vec2 goal) {
  const Vec2 d = goal - pose.position();
  const double dist = d.norm();
  if (dist == 0.0) return {0.0, 0.0};
  return {dist, wrap_pi(std::atan2(d.y, d.x) - pose.heading)};
}

EpisodeStatus episode_status(const Pose2D& pose, const Episode& episode, int steps_taken, WorldMode mode,
                             const GridGeometry& geometry) {
  bool success = false;
  if (mode == WorldMode::Discrete) {
    success = geometry.cell_of(pose.position()) == geometry.cell_of(episode.goal);
  } else {
    success = distance(pose.position(), episode.goal) <= episode.success_radius;
  }
  if (success) return EpisodeStatus::Success;
  if (steps_taken >= episode.budget) return EpisodeStatus::Timeout;
  return EpisodeStatus::Running;
}

}  // namespace navlab
