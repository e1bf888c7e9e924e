#pragma once

#include <optional>
#include <vector>

#include "navlab/world.hpp"

namespace navlab {

/// One simulator step as seen by analysis: the action taken, whether it
/// collided, the ground-truth location at the start of the step and the
/// world-frame points the sensor returned at that location.
struct StepRecord {
  Action action{Action::Forward};
  bool collided{false};
  Vec2 location;
  std::vector<Vec2> observed_points;
  RigidTransform2D achieved;  // ground-truth body-frame motion of this step
  std::optional<Pose2D> belief;  // the agent's own pose estimate, when it keeps one
};

enum class FinalStatus { Success, Timeout };

struct Trajectory {
  std::vector<StepRecord> steps;
  Episode episode;
  Vec2 final_location;
  FinalStatus final_status{FinalStatus::Timeout};

  /// l_0 .. l_T: the location before every step plus the final location.
  std::vector<Vec2> locations() const;
};

}  // namespace navlab
