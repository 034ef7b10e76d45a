#include "defmag/dataset.hpp"

#include <algorithm>
#include <fstream>

#include "defmag/error.hpp"

namespace defmag {
namespace fs = std::filesystem;

std::vector<LabelRow> read_labels(const fs::path& dir) {
  const auto path = dir / "labels.csv";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<LabelRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "path,label,subject") throw ParseError("expected header path,label,subject", 1);
      continue;
    }
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
      throw ParseError("expected 3 fields", line_no);
    }
    LabelRow row;
    row.path = line.substr(0, c1);
    row.subject = line.substr(c2 + 1);
    if (row.path.empty() || row.subject.empty()) throw ParseError("empty field", line_no);
    try {
      row.label = parse_expression(line.substr(c1 + 1, c2 - c1 - 1));
    } catch (const DataError& e) {
      throw ParseError(e.what(), line_no);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path.string() + " lists no sequences");
  return rows;
}

void write_labels(const fs::path& dir, const std::vector<LabelRow>& rows) {
  fs::create_directories(dir);
  std::ofstream out(dir / "labels.csv", std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / "labels.csv").string());
  out << "path,label,subject\n";
  for (const auto& r : rows) out << r.path << ',' << to_string(r.label) << ',' << r.subject << '\n';
  if (!out) throw DataError("failed writing labels.csv");
}

std::vector<fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
  std::vector<fs::path> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".obj") frames.push_back(entry.path());
  }
  std::sort(frames.begin(), frames.end());
  if (frames.empty()) throw DataError(dir.string() + " contains no .obj frames");
  return frames;
}

std::vector<TriMesh> load_mesh_sequence(const fs::path& dir) {
  std::vector<TriMesh> meshes;
  for (const auto& f : list_frames(dir)) {
    try {
      meshes.push_back(load_mesh(f));
    } catch (const ParseError& e) {
      throw ParseError(f.filename().string() + ": " + e.what(), e.line());
    } catch (const DataError& e) {
      throw DataError(f.filename().string() + ": " + e.what());
    }
  }
  return meshes;
}

}  // namespace defmag
