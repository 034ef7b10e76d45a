#include <Eigen/Geometry>

#include "doctest.h"
#include "defmag/icp.hpp"
#include "defmag/synth.hpp"
#include "test_support.hpp"

using namespace defmag;

namespace {

double vertex_rms(const TriMesh& a, const TriMesh& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.vertices.size(); ++i) s += (a.vertices[i] - b.vertices[i]).squaredNorm();
  return std::sqrt(s / static_cast<double>(a.vertices.size()));
}

}  // namespace

TEST_CASE("rigid_align of identical meshes is the identity") {
  const auto m = synth_base_mesh(SynthSpec{});
  const auto r = rigid_align(m, m);
  CHECK(r.converged);
  CHECK(r.residual < 1e-12);
  CHECK((r.transform.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  CHECK(r.transform.translation.norm() < 1e-12);
}

TEST_CASE("rigid_align recovers a known rigid motion") {
  const auto ref = synth_base_mesh(SynthSpec{});
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    RigidTransform tf;
    const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    tf.rotation = Eigen::AngleAxisd(rng.uniform(2.0, 6.0) * std::numbers::pi / 180.0, axis).toRotationMatrix();
    tf.translation = Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    const auto moved = transform_mesh(ref, tf);
    const auto r = rigid_align(moved, ref);
    CHECK(r.converged);
    CHECK(vertex_rms(r.aligned, ref) < 1e-6);
    const auto composed = r.transform.compose(tf);
    CHECK((composed.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-6);
    CHECK(composed.translation.norm() < 1e-6);
  }
}

TEST_CASE("rigid_align residual never increases") {
  const auto ref = synth_base_mesh(SynthSpec{});
  Rng rng(7);
  RigidTransform tf;
  tf.rotation = Eigen::AngleAxisd(0.15, Vec3(0.3, 1.0, 0.2).normalized()).toRotationMatrix();
  tf.translation = Vec3(4, -2, 3);
  auto moved = transform_mesh(ref, tf);
  for (auto& v : moved.vertices) v += Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.2;
  const auto r = rigid_align(moved, ref);
  REQUIRE(r.residual_history.size() >= 2);
  for (std::size_t i = 1; i < r.residual_history.size(); ++i) {
    CHECK(r.residual_history[i] <= r.residual_history[i - 1] + 1e-12);
  }
}

TEST_CASE("rigid_align flags disjoint clouds as non-converged") {
  const auto ref = test::flat_disk(1.0, 4, 8);
  RigidTransform far;
  far.translation = Vec3(1000, 0, 0);
  const auto r = rigid_align(transform_mesh(ref, far), ref);
  CHECK_FALSE(r.converged);
}

TEST_CASE("solve_rigid is exact on noiseless correspondences") {
  Rng rng(11);
  std::vector<Vec3> src, dst;
  const Eigen::Matrix3d rot = test::random_rotation(rng);
  const Vec3 t(1, 2, 3);
  for (int i = 0; i < 20; ++i) {
    src.emplace_back(rng.normal(), rng.normal(), rng.normal());
    dst.push_back(rot * src.back() + t);
  }
  const auto tf = solve_rigid(src, dst);
  CHECK((tf.rotation - rot).norm() < 1e-10);
  CHECK((tf.translation - t).norm() < 1e-10);
  CHECK(tf.rotation.determinant() == doctest::Approx(1.0));
}
