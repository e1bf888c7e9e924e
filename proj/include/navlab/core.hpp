#pragma once

// Shared value types for the navigation lab: planar vectors, poses, rigid
// transforms, integer grid cells and a dense row-major grid container.
// Frame convention everywhere: x east, y north, headings counter-clockwise
// from +x in radians.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace navlab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class ErrorCode {
  InvalidArgument,
  InvalidPose,
  InvalidPosition,
  InvalidMove,
  DegenerateCloud,
  NoCorrespondence,
  NoPath,
  Unreachable,
  Undefined,
  NoFrontier,
  BudgetExceeded,
  GenerationFailed,
  ParseError,
};

const char* to_string(ErrorCode code);

class NavError : public std::runtime_error {
 public:
  NavError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Median; the midpoint of the two middle values for even counts. Throws Undefined when empty.
double median(std::vector<double> values);

/// Wraps an angle into [0, 2*pi).
double wrap_two_pi(double angle);
/// Wraps an angle into (-pi, pi].
double wrap_pi(double angle);

struct Vec2 {
  double x{0.0};
  double y{0.0};

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2, Vec2) = default;

  double norm() const { return std::hypot(x, y); }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }
inline Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Agent pose; heading is kept in [0, 2*pi).
struct Pose2D {
  double x{0.0};
  double y{0.0};
  double heading{0.0};

  Pose2D() = default;
  Pose2D(double x_, double y_, double heading_) : x(x_), y(y_), heading(wrap_two_pi(heading_)) {}

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// Motion expressed in the frame of the pose it is applied to.
struct RigidTransform2D {
  double tx{0.0};
  double ty{0.0};
  double dtheta{0.0};

  RigidTransform2D() = default;
  RigidTransform2D(double tx_, double ty_, double dtheta_) : tx(tx_), ty(ty_), dtheta(wrap_pi(dtheta_)) {}

  static RigidTransform2D identity() { return {}; }

  double translation_norm() const { return std::hypot(tx, ty); }
  Vec2 apply(Vec2 p) const { return rotate(p, dtheta) + Vec2{tx, ty}; }
  RigidTransform2D inverse() const;
  /// this ∘ other: apply `other` first, then `this`.
  RigidTransform2D compose(const RigidTransform2D& other) const;

  friend bool operator==(const RigidTransform2D&, const RigidTransform2D&) = default;
};

/// Applies a body-frame motion to a pose.
Pose2D compose(const Pose2D& pose, const RigidTransform2D& motion);
/// The body-frame motion that carries `from` onto `to`.
RigidTransform2D relative(const Pose2D& from, const Pose2D& to);

struct Cell {
  int x{0};
  int y{0};

  friend auto operator<=>(const Cell&, const Cell&) = default;
  friend Cell operator+(Cell a, Cell b) { return {a.x + b.x, a.y + b.y}; }
};

/// Dense row-major grid; cell (0,0) is the south-west corner.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0) throw NavError(ErrorCode::InvalidArgument, "grid dimensions must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  Cell cell_at(std::size_t idx) const {
    return {static_cast<int>(idx % width_), static_cast<int>(idx / width_)};
  }

  T& operator[](Cell c) { return data_[index(c)]; }
  const T& operator[](Cell c) const { return data_[index(c)]; }
  T& at(Cell c) {
    if (!in_bounds(c)) throw NavError(ErrorCode::InvalidArgument, "cell out of bounds");
    return data_[index(c)];
  }
  const T& at(Cell c) const {
    if (!in_bounds(c)) throw NavError(ErrorCode::InvalidArgument, "cell out of bounds");
    return data_[index(c)];
  }

  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_{0};
  int height_{0};
  std::vector<T> data_;
};

/// Placement of a grid in the world frame.
struct GridGeometry {
  int width{0};
  int height{0};
  double cell_size{1.0};
  Vec2 origin{};  // world position of the south-west corner of cell (0,0)

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  Cell cell_of(Vec2 p) const {
    return {static_cast<int>(std::floor((p.x - origin.x) / cell_size)),
            static_cast<int>(std::floor((p.y - origin.y) / cell_size))};
  }
  Vec2 center_of(Cell c) const {
    return {origin.x + (c.x + 0.5) * cell_size, origin.y + (c.y + 0.5) * cell_size};
  }
};

/// 8-neighbourhood offsets, east first then counter-clockwise.
inline constexpr Cell kDirections8[8] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
inline constexpr Cell kDirections4[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

inline int chebyshev(Cell a, Cell b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }
inline int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

}  // namespace navlab
