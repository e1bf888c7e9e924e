#include "navlab/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace navlab {

namespace {

double coord(Vec2 p, int axis) { return axis == 0 ? p.x : p.y; }

double sq(double v) { return v * v; }

bool closer(const KdTree2D::Neighbor& a, const KdTree2D::Neighbor& b) {
  return a.squared_distance < b.squared_distance ||
         (a.squared_distance == b.squared_distance && a.index < b.index);
}

}  // namespace

KdTree2D::KdTree2D(std::span<const Vec2> points) : points_(points.begin(), points.end()) {
  std::vector<std::size_t> idx(points_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  nodes_.reserve(points_.size());
  root_ = build(idx, 0, idx.size(), 0);
}

int KdTree2D::build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth) {
  if (lo >= hi) return -1;
  const int axis = depth % 2;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi, [&](std::size_t a, std::size_t b) {
    const double ca = coord(points_[a], axis);
    const double cb = coord(points_[b], axis);
    return ca < cb || (ca == cb && a < b);
  });
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({idx[mid], axis});
  const int left = build(idx, lo, mid, depth + 1);
  const int right = build(idx, mid + 1, hi, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

KdTree2D::Neighbor KdTree2D::nearest(Vec2 query) const {
  Neighbor best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
  search_nearest(root_, query, best);
  return best;
}

void KdTree2D::search_nearest(int node, Vec2 q, Neighbor& best) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Vec2 p = points_[n.point];
  const Neighbor cand{n.point, sq(p.x - q.x) + sq(p.y - q.y)};
  if (closer(cand, best)) best = cand;
  const double diff = coord(q, n.axis) - coord(p, n.axis);
  const int near_side = diff < 0 ? n.left : n.right;
  const int far_side = diff < 0 ? n.right : n.left;
  search_nearest(near_side, q, best);
  if (sq(diff) <= best.squared_distance) search_nearest(far_side, q, best);
}

std::vector<KdTree2D::Neighbor> KdTree2D::k_nearest(Vec2 query, std::size_t k) const {
  std::vector<Neighbor> heap;
  if (k == 0) return heap;
  heap.reserve(k + 1);
  search_k(root_, query, k, heap);
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

void KdTree2D::search_k(int node, Vec2 q, std::size_t k, std::vector<Neighbor>& heap) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Vec2 p = points_[n.point];
  const Neighbor cand{n.point, sq(p.x - q.x) + sq(p.y - q.y)};
  if (heap.size() < k) {
    heap.push_back(cand);
    std::push_heap(heap.begin(), heap.end(), closer);
  } else if (closer(cand, heap.front())) {
    std::pop_heap(heap.begin(), heap.end(), closer);
    heap.back() = cand;
    std::push_heap(heap.begin(), heap.end(), closer);
  }
  const double diff = coord(q, n.axis) - coord(p, n.axis);
  const int near_side = diff < 0 ? n.left : n.right;
  const int far_side = diff < 0 ? n.right : n.left;
  search_k(near_side, q, k, heap);
  if (heap.size() < k || sq(diff) <= heap.front().squared_distance) search_k(far_side, q, k, heap);
}

}  // namespace navlab
