#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "defmag/expression.hpp"
#include "defmag/mesh.hpp"

namespace defmag {

/// One row of labels.csv. `path` is relative to the directory holding the
/// file.
struct LabelRow {
  std::string path;
  Expression label = Expression::AN;
  std::string subject;
};

/// Reads `<dir>/labels.csv` (header `path,label,subject`). Throws
/// ParseError on malformed rows and DataError on a missing file or an
/// empty table.
std::vector<LabelRow> read_labels(const std::filesystem::path& dir);
void write_labels(const std::filesystem::path& dir, const std::vector<LabelRow>& rows);

/// `.obj` files of a directory in lexicographic order.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);
std::vector<TriMesh> load_mesh_sequence(const std::filesystem::path& dir);

}  // namespace defmag
