#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "navlab/core.hpp"

namespace navlab {

/// Static 2D k-d tree over a point set, for nearest-neighbour matching.
class KdTree2D {
 public:
  struct Neighbor {
    std::size_t index;
    double squared_distance;
  };

  KdTree2D() = default;
  explicit KdTree2D(std::span<const Vec2> points);

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }
  const Vec2& point(std::size_t i) const { return points_[i]; }

  /// Nearest stored point; ties resolve to the lower index. Tree must be non-empty.
  Neighbor nearest(Vec2 query) const;
  /// Up to k nearest points, closest first.
  std::vector<Neighbor> k_nearest(Vec2 query, std::size_t k) const;

 private:
  struct Node {
    std::size_t point;
    int axis;
    int left{-1};
    int right{-1};
  };

  int build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth);
  void search_nearest(int node, Vec2 q, Neighbor& best) const;
  void search_k(int node, Vec2 q, std::size_t k, std::vector<Neighbor>& heap) const;

  std::vector<Vec2> points_;
  std::vector<Node> nodes_;
  int root_{-1};
};

}  // namespace navlab
