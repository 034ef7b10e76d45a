#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace defmag {

using Vec3 = Eigen::Vector3d;

/// Triangle mesh with 0-based vertex indices.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;

  /// Throws DataError when a face index is out of range or a face repeats
  /// a vertex.
  void validate() const;
};

/// Reads the OBJ subset `v x y z` / `f i j k` (1-based). Other line types
/// are ignored. Throws ParseError on malformed lines and DataError on
/// out-of-range indices, degenerate faces or an empty mesh.
TriMesh load_mesh(const std::filesystem::path& path);
TriMesh parse_obj(std::string_view text);

/// Writes shortest round-trip decimal representations, so load_mesh
/// reproduces the vertex coordinates bit for bit.
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path);
std::string format_obj(const TriMesh& mesh);

/// Keeps vertices within `radius` of `origin`, drops faces that lose a
/// vertex and reindexes. Vertex order is preserved.
TriMesh crop_face(const TriMesh& mesh, const Vec3& origin, double radius);

/// Vertex with the largest projection on `axis`; ties go to the lowest
/// index.
Vec3 find_nose_tip(const TriMesh& mesh, const Vec3& axis = Vec3::UnitZ());

}  // namespace defmag
