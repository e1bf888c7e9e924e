#include "navlab/trajectory.hpp"

namespace navlab {

std::vector<Vec2> Trajectory::locations() const {
  std::vector<Vec2> out;
  out.reserve(steps.size() + 1);
  for (const StepRecord& s : steps) out.push_back(s.location);
  out.push_back(final_location);
  return out;
}

}  // namespace navlab
