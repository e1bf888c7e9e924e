#include "navlab/core.hpp"

#include <algorithm>

namespace navlab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidPose: return "InvalidPose";
    case ErrorCode::InvalidPosition: return "InvalidPosition";
    case ErrorCode::InvalidMove: return "InvalidMove";
    case ErrorCode::DegenerateCloud: return "DegenerateCloud";
    case ErrorCode::NoCorrespondence: return "NoCorrespondence";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::Undefined: return "Undefined";
    case ErrorCode::NoFrontier: return "NoFrontier";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::GenerationFailed: return "GenerationFailed";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

double wrap_two_pi(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  // fmod of a value just below 0 can round up to exactly 2*pi
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

double wrap_pi(double angle) {
  double a = wrap_two_pi(angle);
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

RigidTransform2D RigidTransform2D::inverse() const {
  const Vec2 t = rotate(Vec2{-tx, -ty}, -dtheta);
  return {t.x, t.y, -dtheta};
}

RigidTransform2D RigidTransform2D::compose(const RigidTransform2D& other) const {
  const Vec2 t = apply(Vec2{other.tx, other.ty});
  return {t.x, t.y, dtheta + other.dtheta};
}

Pose2D compose(const Pose2D& pose, const RigidTransform2D& motion) {
  const Vec2 d = rotate(Vec2{motion.tx, motion.ty}, pose.heading);
  return {pose.x + d.x, pose.y + d.y, pose.heading + motion.dtheta};
}

RigidTransform2D relative(const Pose2D& from, const Pose2D& to) {
  const Vec2 d = rotate(to.position() - from.position(), -from.heading);
  return {d.x, d.y, to.heading - from.heading};
}

double median(std::vector<double> values) {
  if (values.empty()) throw NavError(ErrorCode::Undefined, "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace navlab
