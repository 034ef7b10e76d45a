#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "defmag/mesh.hpp"

namespace defmag {

/// x -> rotation * x + translation
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  /// (this * other)(x) = this(other(x))
  RigidTransform compose(const RigidTransform& other) const;
  RigidTransform inverse() const;
};

TriMesh transform_mesh(const TriMesh& mesh, const RigidTransform& tf);

struct IcpOptions {
  int max_iterations = 50;
  /// Stop once the residual changes by less than this between iterations.
  double rms_tolerance = 1e-8;
  /// Correspondences farther than this are rejected. A value <= 0 selects
  /// `max_distance_ratio` times the reference bounding-box diagonal.
  double max_correspondence_distance = 0.0;
  double max_distance_ratio = 0.25;
  /// Fewer accepted correspondences than this aborts as non-converged.
  std::size_t min_correspondences = 3;
};

struct IcpResult {
  TriMesh aligned;
  RigidTransform transform;  ///< maps `moving` onto `reference`
  double residual = 0.0;     ///< truncated RMS distance to the reference surface
  int iterations = 0;
  bool converged = false;
  /// Residual of every accepted pose, starting with the initial one.
  std::vector<double> residual_history;
};

/// Point-to-point ICP with an SVD rigid solve. Targets are the closest points
/// on the faces around the nearest reference vertex; near the optimum the
/// nearest vertices themselves are used. d is the distance to that face
/// patch and the residual is the RMS of min(d, max_correspondence_distance)
/// over all moving vertices. A step that raises it is not accepted, so the
/// history is non-increasing. Never throws on non-convergence; the best pose
/// found is returned with `converged == false`.
IcpResult rigid_align(const TriMesh& moving, const TriMesh& reference,
                      const IcpOptions& options = {});

/// Least-squares rigid transform mapping `src[i]` onto `dst[i]` (Kabsch).
RigidTransform solve_rigid(const std::vector<Vec3>& src,
                           const std::vector<Vec3>& dst);

}  // namespace defmag
