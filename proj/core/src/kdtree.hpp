#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "defmag/mesh.hpp"

namespace defmag::detail {

// Static 3-d tree for nearest-neighbour queries over a fixed point set.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& points) : points_(points) {
    index_.resize(points.size());
    std::iota(index_.begin(), index_.end(), 0u);
    nodes_.reserve(points.size());
    if (!points.empty()) build(0, static_cast<std::uint32_t>(points.size()));
  }

  // Returns the index of the nearest point and its squared distance.
  std::pair<std::uint32_t, double> nearest(const Vec3& q) const {
    std::uint32_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    if (!nodes_.empty()) search(0, q, best, best_d2);
    return {best, best_d2};
  }

 private:
  struct Node {
    std::uint32_t point;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end) {
    if (begin >= end) return -1;
    Vec3 lo = points_[index_[begin]], hi = lo;
    for (auto i = begin; i < end; ++i) {
      lo = lo.cwiseMin(points_[index_[i]]);
      hi = hi.cwiseMax(points_[index_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const auto mid = begin + (end - begin) / 2;
    std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       const double pa = points_[a][axis], pb = points_[b][axis];
                       return pa < pb || (pa == pb && a < b);
                     });
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({index_[mid], -1, -1, static_cast<std::uint8_t>(axis)});
    const auto l = build(begin, mid);
    const auto r = build(mid + 1, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  void search(std::int32_t id, const Vec3& q, std::uint32_t& best, double& best_d2) const {
    const Node& n = nodes_[id];
    const Vec3& p = points_[n.point];
    const double d2 = (p - q).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && n.point < best)) {
      best_d2 = d2;
      best = n.point;
    }
    const double diff = q[n.axis] - p[n.axis];
    const auto near = diff < 0 ? n.left : n.right;
    const auto far = diff < 0 ? n.right : n.left;
    if (near >= 0) search(near, q, best, best_d2);
    if (far >= 0 && diff * diff <= best_d2) search(far, q, best, best_d2);
  }

  const std::vector<Vec3>& points_;
  std::vector<std::uint32_t> index_;
  std::vector<Node> nodes_;
};

}  // namespace defmag::detail
