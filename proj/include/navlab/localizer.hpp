#pragma once

// Scan-matching localizer: ICP between consecutive scans, arbitrated by the
// agreement between dead reckoning and the position implied by the goal
// signal, with an action-prior fallback and a final translation fine-tune.

#include <array>
#include <map>
#include <span>
#include <vector>

#include "navlab/trajectory.hpp"
#include "navlab/world.hpp"

namespace navlab {

enum class IcpVariant { PointToPoint, PointToPlane };

struct IcpConfig {
  int max_iterations{60};
  double correspondence_max_dist{0.5};
  double convergence_tol{1e-7};
  IcpVariant variant{IcpVariant::PointToPlane};
  int min_points{3};
  double voxel_size{0.0};  // 0 disables voxel thinning

  void validate() const;
};

struct IcpResult {
  RigidTransform2D transform;  // maps current-cloud points into the reference frame
  double residual{0.0};        // RMS distance of final inlier pairs
  int iterations{0};
  std::size_t inliers{0};
};

/// Keeps the first point falling in each square voxel, preserving order.
std::vector<Vec2> voxel_thin(std::span<const Vec2> points, double voxel_size);

/// Per-point unit normals from a line fit through each point and its two
/// nearest neighbours, oriented toward the sensor at the origin.
std::vector<Vec2> estimate_normals(std::span<const Vec2> points);

/// Throws DegenerateCloud when a cloud has fewer than min_points points and
/// NoCorrespondence when too few pairs survive outlier rejection.
IcpResult icp_align(std::span<const Vec2> reference, std::span<const Vec2> current, const RigidTransform2D& init,
                    const IcpConfig& cfg);

struct ActionPrior {
  RigidTransform2D motion;
  bool fallback{false};  // no training samples; nominal motion used
  std::size_t samples{0};
};

class ActionPriorTable {
 public:
  ActionPriorTable() = default;
  /// Nominal motion for every action, flagged as fallback.
  static ActionPriorTable nominal(const ActionSpace& space);

  void set(Action a, const ActionPrior& prior) { entries_[a] = prior; }
  const ActionPrior& at(Action a) const;
  bool contains(Action a) const { return entries_.count(a) != 0; }
  const std::map<Action, ActionPrior>& entries() const { return entries_; }

 private:
  std::map<Action, ActionPrior> entries_;
};

/// Component-wise median of the ground-truth motion of every logged action.
ActionPriorTable estimate_action_priors(std::span<const Trajectory> training, const ActionSpace& space);

/// Distance between the candidate position and the position implied by the
/// observed goal distance/bearing under the candidate heading.
double consistency_distance(const Pose2D& candidate, const GoalObservation& goal_obs, Vec2 goal_coords);
/// The goal-implied position for a given heading.
Vec2 goal_implied_position(double heading, const GoalObservation& goal_obs, Vec2 goal_coords);

enum class PoseSource { Icp, Prior };

struct PoseBelief {
  Pose2D pose;
  PoseSource source{PoseSource::Prior};
  double discrepancy{0.0};
};

struct LocalizerConfig {
  std::array<IcpConfig, 3> runs;
  double consistency_gate{0.2};

  /// Point-to-point, point-to-plane, and point-to-plane on a cloud thinned
  /// at half the map cell size.
  static LocalizerConfig defaults(double cell_size);
};

PoseBelief localize_step(const PoseBelief& previous, const RangeScan& previous_scan, const RangeScan& current_scan,
                         Action commanded, const GoalObservation& goal_obs, Vec2 goal_coords,
                         const ActionPriorTable& priors, const LocalizerConfig& cfg);

}  // namespace navlab
