#include "navlab/localizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "navlab/kdtree.hpp"

namespace navlab {

void IcpConfig::validate() const {
  if (max_iterations < 1) throw NavError(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  if (min_points < 3) throw NavError(ErrorCode::InvalidArgument, "min_points must be >= 3");
  if (!(correspondence_max_dist > 0.0)) throw NavError(ErrorCode::InvalidArgument, "correspondence_max_dist must be positive");
  if (voxel_size < 0.0) throw NavError(ErrorCode::InvalidArgument, "voxel_size must be >= 0");
}

std::vector<Vec2> voxel_thin(std::span<const Vec2> points, double voxel_size) {
  if (voxel_size <= 0.0) return {points.begin(), points.end()};
  std::vector<Vec2> out;
  std::set<std::pair<long, long>> seen;
  for (const Vec2& p : points) {
    const std::pair<long, long> key{std::lround(std::floor(p.x / voxel_size)), std::lround(std::floor(p.y / voxel_size))};
    if (seen.insert(key).second) out.push_back(p);
  }
  return out;
}

std::vector<Vec2> estimate_normals(std::span<const Vec2> points) {
  std::vector<Vec2> normals(points.size());
  const KdTree2D tree(points);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec2 p = points[i];
    Vec2 n{};
    if (points.size() >= 3) {
      const auto nn = tree.k_nearest(p, 3);
      Vec2 mean{};
      for (const auto& m : nn) mean = mean + tree.point(m.index);
      mean = (1.0 / nn.size()) * mean;
      double sxx = 0, sxy = 0, syy = 0;
      for (const auto& m : nn) {
        const Vec2 d = tree.point(m.index) - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
      }
      const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
      n = {-std::sin(phi), std::cos(phi)};
    } else {
      const double r = p.norm();
      n = r > 0 ? (-1.0 / r) * p : Vec2{1.0, 0.0};
    }
    if (n.dot(p) > 0) n = -1.0 * n;
    normals[i] = n;
  }
  return normals;
}

namespace {

// Rays that graze a surface give unreliable normals.
constexpr double kMinIncidenceCos = 0.15;

struct Pair {
  Vec2 current;    // current-cloud point in its own frame
  Vec2 reference;  // matched reference point
  Vec2 normal;
};

std::vector<Pair> match(const KdTree2D& tree, std::span<const Vec2> current, const std::vector<Vec2>& normals,
                        const std::vector<bool>& usable, const RigidTransform2D& t, double max_dist) {
  std::vector<Pair> pairs;
  pairs.reserve(current.size());
  const double max_sq = max_dist * max_dist;
  for (const Vec2& c : current) {
    const auto nn = tree.nearest(t.apply(c));
    if (nn.squared_distance > max_sq || !usable[nn.index]) continue;
    pairs.push_back({c, tree.point(nn.index), normals.empty() ? Vec2{} : normals[nn.index]});
  }
  return pairs;
}

RigidTransform2D solve_point_to_point(const std::vector<Pair>& pairs) {
  Vec2 mc{}, mr{};
  for (const auto& p : pairs) {
    mc = mc + p.current;
    mr = mr + p.reference;
  }
  mc = (1.0 / pairs.size()) * mc;
  mr = (1.0 / pairs.size()) * mr;
  double s_cos = 0.0, s_sin = 0.0;
  for (const auto& p : pairs) {
    const Vec2 a = p.current - mc;
    const Vec2 b = p.reference - mr;
    s_cos += a.dot(b);
    s_sin += a.cross(b);
  }
  const double theta = std::atan2(s_sin, s_cos);
  const Vec2 t = mr - rotate(mc, theta);
  return {t.x, t.y, theta};
}

RigidTransform2D solve_point_to_plane(const std::vector<Pair>& pairs, const RigidTransform2D& t) {
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (const auto& p : pairs) {
    const Vec2 q = t.apply(p.current);
    const Eigen::Vector3d j(p.normal.dot(Vec2{-q.y, q.x}), p.normal.x, p.normal.y);
    const double e = (q - p.reference).dot(p.normal);
    a += j * j.transpose();
    b += j * e;
  }
  // light damping keeps unobservable directions (e.g. along a corridor) still
  a += 1e-9 * Eigen::Matrix3d::Identity();
  const Eigen::Vector3d d = a.ldlt().solve(-b);
  const RigidTransform2D step{d(1), d(2), d(0)};
  return step.compose(t);
}

}  // namespace

IcpResult icp_align(std::span<const Vec2> reference, std::span<const Vec2> current, const RigidTransform2D& init,
                    const IcpConfig& cfg) {
  cfg.validate();
  const std::vector<Vec2> ref = voxel_thin(reference, cfg.voxel_size);
  const std::vector<Vec2> cur = voxel_thin(current, cfg.voxel_size);
  if (ref.size() < static_cast<std::size_t>(cfg.min_points) || cur.size() < static_cast<std::size_t>(cfg.min_points)) {
    throw NavError(ErrorCode::DegenerateCloud, "cloud has fewer than min_points points");
  }

  const KdTree2D tree(ref);
  std::vector<Vec2> normals;
  std::vector<bool> usable(ref.size(), true);
  if (cfg.variant == IcpVariant::PointToPlane) {
    normals = estimate_normals(ref);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const double r = ref[i].norm();
      usable[i] = r > 0 && std::abs(normals[i].dot((1.0 / r) * ref[i])) >= kMinIncidenceCos;
    }
  }

  RigidTransform2D t = init;
  IcpResult result;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const auto pairs = match(tree, cur, normals, usable, t, cfg.correspondence_max_dist);
    if (pairs.size() < 3) throw NavError(ErrorCode::NoCorrespondence, "too few correspondences within max distance");
    const RigidTransform2D next =
        cfg.variant == IcpVariant::PointToPoint ? solve_point_to_point(pairs) : solve_point_to_plane(pairs, t);
    const double change = std::hypot(next.tx - t.tx, next.ty - t.ty) + std::abs(wrap_pi(next.dtheta - t.dtheta));
    t = next;
    result.iterations = it + 1;
    if (change < cfg.convergence_tol) break;
  }

  const std::vector<bool> all(ref.size(), true);
  const auto final_pairs = match(tree, cur, {}, all, t, cfg.correspondence_max_dist);
  if (final_pairs.empty()) throw NavError(ErrorCode::NoCorrespondence, "no inliers at the final transform");
  double sum_sq = 0.0;
  for (const auto& p : final_pairs) {
    const Vec2 d = t.apply(p.current) - p.reference;
    sum_sq += d.dot(d);
  }
  result.transform = t;
  result.inliers = final_pairs.size();
  result.residual = std::sqrt(sum_sq / final_pairs.size());
  return result;
}

ActionPriorTable ActionPriorTable::nominal(const ActionSpace& space) {
  ActionPriorTable table;
  for (Action a : space.actions()) table.set(a, {space.nominal_motion(a), true, 0});
  return table;
}

const ActionPrior& ActionPriorTable::at(Action a) const {
  const auto it = entries_.find(a);
  if (it == entries_.end()) throw NavError(ErrorCode::InvalidArgument, std::string("no prior for action ") + to_string(a));
  return it->second;
}

ActionPriorTable estimate_action_priors(std::span<const Trajectory> training, const ActionSpace& space) {
  std::map<Action, std::array<std::vector<double>, 3>> samples;
  for (const Trajectory& traj : training) {
    for (const StepRecord& s : traj.steps) {
      auto& bucket = samples[s.action];
      bucket[0].push_back(s.achieved.tx);
      bucket[1].push_back(s.achieved.ty);
      bucket[2].push_back(s.achieved.dtheta);
    }
  }
  ActionPriorTable table = ActionPriorTable::nominal(space);
  for (Action a : space.actions()) {
    const auto it = samples.find(a);
    if (it == samples.end() || it->second[0].empty()) continue;
    const auto& b = it->second;
    table.set(a, {RigidTransform2D(median(b[0]), median(b[1]), median(b[2])), false, b[0].size()});
  }
  return table;
}

Vec2 goal_implied_position(double heading, const GoalObservation& goal_obs, Vec2 goal_coords) {
  return goal_coords - goal_obs.distance * unit(heading + goal_obs.bearing);
}

double consistency_distance(const Pose2D& candidate, const GoalObservation& goal_obs, Vec2 goal_coords) {
  return distance(candidate.position(), goal_implied_position(candidate.heading, goal_obs, goal_coords));
}

LocalizerConfig LocalizerConfig::defaults(double cell_size) {
  LocalizerConfig cfg;
  cfg.runs[0].variant = IcpVariant::PointToPoint;
  cfg.runs[1].variant = IcpVariant::PointToPlane;
  cfg.runs[2].variant = IcpVariant::PointToPlane;
  cfg.runs[2].voxel_size = cell_size / 2.0;
  return cfg;
}

PoseBelief localize_step(const PoseBelief& previous, const RangeScan& previous_scan, const RangeScan& current_scan,
                         Action commanded, const GoalObservation& goal_obs, Vec2 goal_coords,
                         const ActionPriorTable& priors, const LocalizerConfig& cfg) {
  const RigidTransform2D prior = priors.at(commanded).motion;
  const std::vector<Vec2> ref = previous_scan.points();
  const std::vector<Vec2> cur = current_scan.points();

  std::optional<PoseBelief> best;
  for (const IcpConfig& run : cfg.runs) {
    try {
      const IcpResult r = icp_align(ref, cur, prior, run);
      const Pose2D cand = compose(previous.pose, r.transform);
      const double disc = consistency_distance(cand, goal_obs, goal_coords);
      if (!best || disc < best->discrepancy) best = PoseBelief{cand, PoseSource::Icp, disc};
    } catch (const NavError&) {
      // a failed run simply contributes no candidate
    }
  }
  if (!best || best->discrepancy > cfg.consistency_gate) {
    const Pose2D cand = compose(previous.pose, prior);
    best = PoseBelief{cand, PoseSource::Prior, consistency_distance(cand, goal_obs, goal_coords)};
  }

  // Keep the heading, move the position onto the goal-implied estimate.
  const Vec2 tuned = goal_implied_position(best->pose.heading, goal_obs, goal_coords);
  best->pose = Pose2D(tuned.x, tuned.y, best->pose.heading);
  return *best;
}

}  // namespace navlab
