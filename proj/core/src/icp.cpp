#include "defmag/icp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/SVD>

#include "defmag/error.hpp"
#include "kdtree.hpp"

namespace defmag {

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
  return {rotation * other.rotation, rotation * other.translation + translation};
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Matrix3d rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

TriMesh transform_mesh(const TriMesh& mesh, const RigidTransform& tf) {
  TriMesh out = mesh;
  for (auto& v : out.vertices) v = tf.apply(v);
  return out;
}

RigidTransform solve_rigid(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  if (src.size() != dst.size() || src.empty()) {
    throw DataError("solve_rigid needs equally sized, non-empty point sets");
  }
  const double n = static_cast<double>(src.size());
  Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= n;
  cd /= n;
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) h += (src[i] - cs) * (dst[i] - cd).transpose();

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((v * u.transpose()).determinant() < 0) d(2, 2) = -1.0;
  RigidTransform tf;
  tf.rotation = v * d * u.transpose();
  tf.translation = cd - tf.rotation * cs;
  return tf;
}

namespace {

// Closest point of triangle abc to p (Ericson, Real-Time Collision Detection 5.1.5).
Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0) return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  const double denom = va + vb + vc;
  if (!(std::abs(denom) > 0.0)) return a;
  return a + ab * (vb / denom) + ac * (vc / denom);
}

}  // namespace

IcpResult rigid_align(const TriMesh& moving, const TriMesh& reference, const IcpOptions& options) {
  if (moving.vertices.empty() || reference.vertices.empty()) {
    throw DataError("rigid_align needs non-empty meshes");
  }

  double max_dist = options.max_correspondence_distance;
  if (max_dist <= 0.0) {
    Vec3 lo = reference.vertices.front(), hi = lo;
    for (const auto& v : reference.vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    max_dist = options.max_distance_ratio * (hi - lo).norm();
    if (!(max_dist > 0.0)) max_dist = std::numeric_limits<double>::infinity();
  }
  const double max_d2 = max_dist * max_dist;

  const detail::KdTree tree(reference.vertices);
  // Faces around each reference vertex; correspondences are closest points
  // on the faces around the nearest vertex.
  std::vector<std::vector<std::uint32_t>> incident(reference.vertices.size());
  for (std::size_t f = 0; f < reference.faces.size(); ++f) {
    for (auto v : reference.faces[f]) incident[v].push_back(static_cast<std::uint32_t>(f));
  }
  auto closest_on_surface = [&](const Vec3& p, std::size_t j) {
    Vec3 best_point = reference.vertices[j];
    double best_d2 = (p - best_point).squaredNorm();
    for (auto f : incident[j]) {
      const auto& tri = reference.faces[f];
      const Vec3 q = closest_on_triangle(p, reference.vertices[tri[0]], reference.vertices[tri[1]],
                                         reference.vertices[tri[2]]);
      const double d2 = (p - q).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best_point = q;
      }
    }
    return std::pair{best_point, best_d2};
  };
  const std::size_t n = moving.vertices.size();

  RigidTransform current;
  std::vector<Vec3> posed(moving.vertices);
  std::vector<Vec3> src, dst;
  src.reserve(n);
  dst.reserve(n);

  // Truncated residual (distance to the surface) at the current pose; fills
  // the accepted pairs, matched either to the surface or to the nearest
  // vertex.
  bool snap = false;
  auto correspond = [&]() {
    src.clear();
    dst.clear();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = tree.nearest(posed[i]).first;
      const auto [q, d2] = closest_on_surface(posed[i], j);
      if (d2 <= max_d2) {
        src.push_back(moving.vertices[i]);
        dst.push_back(snap ? reference.vertices[j] : q);
        sum += d2;
      } else {
        sum += max_d2;
      }
    }
    return std::sqrt(sum / static_cast<double>(n));
  };

  IcpResult result;
  double residual = correspond();
  result.residual_history.push_back(residual);
  RigidTransform best = current;
  double best_residual = residual;

  bool converged = false;
  // Residual at the last failed switch to vertex matches.
  double snap_failed_at = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (src.size() < options.min_correspondences) break;
    current = solve_rigid(src, dst);
    for (std::size_t i = 0; i < n; ++i) posed[i] = current.apply(moving.vertices[i]);
    const double next = correspond();
    if (next > residual) {
      if (!snap) {
        // Closest points are searched locally, so a step can go uphill;
        // keep the best pose.
        converged = true;
        ++it;
        break;
      }
      // Vertex matches were premature; back to surface matches.
      snap = false;
      snap_failed_at = residual;
      for (std::size_t i = 0; i < n; ++i) posed[i] = best.apply(moving.vertices[i]);
      correspond();
      continue;
    }
    result.residual_history.push_back(next);
    best_residual = next;
    best = current;
    const bool small_change = std::abs(residual - next) < options.rms_tolerance;
    // Surface matches slide slowly once close; vertex matches then finish
    // the alignment.
    if (!snap && residual - next < 0.1 * residual && next < 0.5 * snap_failed_at) {
      snap = true;
      correspond();
    }
    residual = next;
    if (small_change) {
      converged = src.size() >= options.min_correspondences;
      ++it;
      break;
    }
  }

  result.transform = best;
  result.residual = best_residual;
  result.iterations = it;
  result.converged = converged;
  result.aligned = transform_mesh(moving, best);
  return result;
}

}  // namespace defmag
