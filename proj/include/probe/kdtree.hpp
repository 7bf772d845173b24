#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <utility>
#include <limits>
#include <vector>

namespace probe {

/// Static k-d tree over fixed-dimension points with exact k-NN queries.
/// Ties in distance are broken by insertion order (lower index wins).
template <int Dim>
class KdTree {
 public:
  using Point = std::array<double, Dim>;

  KdTree() = default;

  explicit KdTree(std::vector<Point> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    for (size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    if (!order_.empty()) build(0, order_.size(), 0);
  }

  size_t size() const { return points_.size(); }
  const Point& point(size_t i) const { return points_[i]; }

  /// Indices of the k nearest points (k clamped to size), closest first.
  std::vector<size_t> knn(const Point& query, size_t k) const {
    k = std::min(k, points_.size());
    Heap heap;
    if (k > 0) search(query, k, 0, order_.size(), 0, heap);
    std::sort(heap.begin(), heap.end());
    std::vector<size_t> out;
    out.reserve(heap.size());
    for (const auto& e : heap) out.push_back(e.second);
    return out;
  }

 private:
  // (distance^2, index) max-heap; worst element at front.
  using Entry = std::pair<double, size_t>;
  using Heap = std::vector<Entry>;

  static double dist2(const Point& a, const Point& b) {
    double s = 0.0;
    for (int i = 0; i < Dim; ++i) {
      const double d = a[i] - b[i];
      s += d * d;
    }
    return s;
  }

  void build(size_t lo, size_t hi, int axis) {
    if (hi - lo <= 1) return;
    const size_t mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid,
                     order_.begin() + hi, [this, axis](size_t a, size_t b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    const int next = (axis + 1) % Dim;
    build(lo, mid, next);
    build(mid + 1, hi, next);
  }

  void consider(const Point& query, size_t k, size_t idx, Heap& heap) const {
    const Entry e{dist2(query, points_[idx]), idx};
    if (heap.size() < k) {
      heap.push_back(e);
      std::push_heap(heap.begin(), heap.end());
    } else if (e < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = e;
      std::push_heap(heap.begin(), heap.end());
    }
  }

  void search(const Point& query, size_t k, size_t lo, size_t hi, int axis,
              Heap& heap) const {
    if (lo >= hi) return;
    const size_t mid = (lo + hi) / 2;
    consider(query, k, order_[mid], heap);
    const double delta = query[axis] - points_[order_[mid]][axis];
    const int next = (axis + 1) % Dim;
    if (delta < 0) {
      search(query, k, lo, mid, next, heap);
      if (heap.size() < k || delta * delta <= heap.front().first) {
        search(query, k, mid + 1, hi, next, heap);
      }
    } else {
      search(query, k, mid + 1, hi, next, heap);
      if (heap.size() < k || delta * delta <= heap.front().first) {
        search(query, k, lo, mid, next, heap);
      }
    }
  }

  std::vector<Point> points_;
  std::vector<size_t> order_;
};

} // namespace probe
