#pragma once

// Deterministic 2D world simulation: ground-truth maps, the two action
// spaces (continuous 0.2 m / 7.2 deg and discrete 0.8 m cells / 90 deg),
// planar range sensing with optional Gaussian noise, push-back physics and
// episode bookkeeping.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "navlab/core.hpp"

namespace navlab {

using Rng = std::mt19937_64;

enum class CellKind : std::uint8_t { Free, Obstacle, Wall };

/// Static occupancy ground truth. Walls are obstacles that also occlude
/// visibility; the border is always wall.
class GroundTruthMap {
 public:
  GroundTruthMap() = default;
  /// Throws InvalidArgument if the border is not wall or no free cell exists.
  GroundTruthMap(Grid<CellKind> cells, double cell_size);

  /// Rows are given north-first: rows.front() is the top (largest y) row.
  /// '#' wall, 'X' non-wall obstacle, '.' free.
  static GroundTruthMap from_ascii(const std::vector<std::string>& rows, double cell_size);
  std::vector<std::string> to_ascii() const;

  int width() const { return cells_.width(); }
  int height() const { return cells_.height(); }
  double cell_size() const { return cell_size_; }
  GridGeometry geometry() const { return {width(), height(), cell_size_, {}}; }
  const Grid<CellKind>& cells() const { return cells_; }

  bool in_bounds(Cell c) const { return cells_.in_bounds(c); }
  /// Out-of-bounds cells count as obstacles.
  bool is_obstacle(Cell c) const { return !in_bounds(c) || cells_[c] != CellKind::Free; }
  bool is_wall(Cell c) const { return !in_bounds(c) || cells_[c] == CellKind::Wall; }
  bool is_free(Cell c) const { return in_bounds(c) && cells_[c] == CellKind::Free; }
  Cell cell_of(Vec2 p) const { return geometry().cell_of(p); }
  Vec2 center_of(Cell c) const { return geometry().center_of(c); }

  Grid<std::uint8_t> obstacle_mask() const;

  friend bool operator==(const GroundTruthMap&, const GroundTruthMap&) = default;

 private:
  Grid<CellKind> cells_;
  double cell_size_{0.1};
};

enum class WorldMode { Continuous, Discrete };

enum class Action : std::uint8_t { Forward, RotateLeft, RotateRight, Stay };

const char* to_string(Action a);
Action action_from_string(const std::string& s);
const char* to_string(WorldMode m);
WorldMode mode_from_string(const std::string& s);

struct ActionSpace {
  WorldMode mode{WorldMode::Continuous};
  double forward_step{0.2};
  double turn_step{kTwoPi / 50.0};
  bool has_stay{false};

  static ActionSpace continuous();  // 0.2 m, 7.2 deg
  static ActionSpace discrete();    // 0.8 m, 90 deg, Stay

  /// Throws InvalidArgument when a field invariant is violated.
  void validate() const;
  std::vector<Action> actions() const;
  bool contains(Action a) const;
  /// Commanded motion of an action in the body frame.
  RigidTransform2D nominal_motion(Action a) const;
};

struct Episode {
  Pose2D start;
  Vec2 goal;
  int budget{500};
  double success_radius{0.2};
};

struct SensorConfig {
  double fov{std::numbers::pi / 2.0};
  int ray_count{128};
  double max_range{4.0};
  double noise_level{0.0};

  void validate() const;
};

struct RangeScan {
  std::vector<double> ranges;    // +inf marks a ray with no return within max_range
  std::vector<double> bearings;  // relative to heading, counter-clockwise positive
  double max_range{4.0};

  static bool is_max_range(double r) { return !std::isfinite(r); }
  /// Endpoints of the finite rays in the sensor frame.
  std::vector<Vec2> points() const;
};

struct PhysicsConfig {
  double slip_sigma{0.01};
  double pushback_stop_margin{0.02};

  static PhysicsConfig for_mode(WorldMode mode);
  void validate() const;
};

struct StepOutcome {
  Pose2D new_pose;
  bool collided{false};
  RigidTransform2D achieved_transform;
};

struct GoalObservation {
  double distance{0.0};
  double bearing{0.0};
};

enum class EpisodeStatus { Running, Success, Timeout };

/// Distance from `origin` to the first obstacle-cell boundary along `angle`,
/// or +inf when none is met within max_range.
double cast_ray(const GroundTruthMap& map, Vec2 origin, double angle, double max_range);

RangeScan raycast_scan(const GroundTruthMap& map, const Pose2D& pose, const SensorConfig& cfg,
                       double forward_step, Rng& rng);
/// Zero-mean Gaussian range noise with 3*sigma = level * forward_step.
RangeScan apply_noise(const RangeScan& scan, double level, double forward_step, Rng& rng);
inline double noise_sigma(double level, double forward_step) { return level * forward_step / 3.0; }

StepOutcome step_continuous(const GroundTruthMap& map, const Pose2D& pose, Action action,
                            const ActionSpace& space, const PhysicsConfig& physics, Rng& rng);
StepOutcome step_discrete(const GroundTruthMap& map, const Pose2D& pose, Action action, const ActionSpace& space);
StepOutcome step_world(const GroundTruthMap& map, const Pose2D& pose, Action action, const ActionSpace& space,
                       const PhysicsConfig& physics, Rng& rng);

GoalObservation goal_signal(const Pose2D& pose, Vec2 goal);

EpisodeStatus episode_status(const Pose2D& pose, const Episode& episode, int steps_taken, WorldMode mode,
                             const GridGeometry& geometry);

/// Heading index (multiples of 90 deg) of a discrete-mode heading.
int quarter_turns(double heading);

}  // namespace navlab
