#include "defmag/mesh.hpp"

#include <limits>
#include <string>

#include "defmag/error.hpp"

namespace defmag {

void TriMesh::validate() const {
  const auto n = vertices.size();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& tri = faces[f];
    for (auto idx : tri) {
      if (idx >= n) {
        throw DataError("face " + std::to_string(f) + " references vertex " +
                        std::to_string(idx + 1) + " but the mesh has " + std::to_string(n) +
                        " vertices");
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw DataError("face " + std::to_string(f) + " is degenerate");
    }
  }
}

TriMesh crop_face(const TriMesh& mesh, const Vec3& origin, double radius) {
  if (!(radius > 0.0)) throw UsageError("crop radius must be positive");

  constexpr auto kDropped = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> remap(mesh.vertices.size(), kDropped);
  TriMesh out;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if ((mesh.vertices[i] - origin).squaredNorm() <= r2) {
      remap[i] = static_cast<std::uint32_t>(out.vertices.size());
      out.vertices.push_back(mesh.vertices[i]);
    }
  }
  if (out.vertices.empty()) {
    throw DataError("crop radius " + std::to_string(radius) + " leaves no vertex");
  }
  for (const auto& tri : mesh.faces) {
    if (remap[tri[0]] == kDropped || remap[tri[1]] == kDropped || remap[tri[2]] == kDropped)
      continue;
    out.faces.push_back({remap[tri[0]], remap[tri[1]], remap[tri[2]]});
  }
  return out;
}

Vec3 find_nose_tip(const TriMesh& mesh, const Vec3& axis) {
  if (mesh.vertices.empty()) throw DataError("cannot find the nose tip of an empty mesh");
  std::size_t best = 0;
  double best_proj = mesh.vertices[0].dot(axis);
  for (std::size_t i = 1; i < mesh.vertices.size(); ++i) {
    const double p = mesh.vertices[i].dot(axis);
    if (p > best_proj) {
      best_proj = p;
      best = i;
    }
  }
  return mesh.vertices[best];
}

}  // namespace defmag
