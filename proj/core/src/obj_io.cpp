#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "defmag/error.hpp"
#include "defmag/mesh.hpp"

namespace defmag {
namespace {

std::string_view next_token(std::string_view& s) {
  std::size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
  std::size_t e = b;
  while (e < s.size() && s[e] != ' ' && s[e] != '\t') ++e;
  auto tok = s.substr(b, e - b);
  s.remove_prefix(e);
  return tok;
}

double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("invalid number '" + std::string(tok) + "'", line);
  }
  return v;
}

std::uint32_t parse_index(std::string_view tok, std::size_t line) {
  // Accept "i", "i/t" and "i/t/n"; only the vertex index is used.
  tok = tok.substr(0, tok.find('/'));
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw ParseError("invalid face index '" + std::string(tok) + "'", line);
  }
  if (v < 1 || v > 0xffffffffLL) {
    throw DataError("line " + std::to_string(line) + ": face index " + std::to_string(v) +
                    " out of range");
  }
  return static_cast<std::uint32_t>(v - 1);
}

}  // namespace

TriMesh parse_obj(std::string_view text) {
  TriMesh mesh;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::string_view rest = line;
    const auto kind = next_token(rest);
    if (kind == "v") {
      Vec3 p;
      for (int k = 0; k < 3; ++k) {
        const auto tok = next_token(rest);
        if (tok.empty()) throw ParseError("vertex needs three coordinates", line_no);
        p[k] = parse_double(tok, line_no);
      }
      // An optional fourth (w) or colour components are ignored.
      mesh.vertices.push_back(p);
    } else if (kind == "f") {
      std::array<std::uint32_t, 3> tri{};
      for (int k = 0; k < 3; ++k) {
        const auto tok = next_token(rest);
        if (tok.empty()) throw ParseError("face needs three indices", line_no);
        tri[k] = parse_index(tok, line_no);
      }
      if (!next_token(rest).empty()) throw ParseError("only triangular faces are supported", line_no);
      mesh.faces.push_back(tri);
    }
  }
  if (mesh.vertices.size() < 3 || mesh.faces.empty()) {
    throw DataError("mesh is empty (needs at least 3 vertices and 1 face)");
  }
  mesh.validate();
  return mesh;
}

TriMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_obj(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string format_obj(const TriMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 64 + mesh.faces.size() * 24);
  char buf[64];
  for (const auto& v : mesh.vertices) {
    out += 'v';
    for (int k = 0; k < 3; ++k) {
      out += ' ';
      auto res = std::to_chars(buf, buf + sizeof(buf), v[k]);
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  for (const auto& f : mesh.faces) {
    out += 'f';
    for (int k = 0; k < 3; ++k) {
      out += ' ';
      out += std::to_string(f[k] + 1);
    }
    out += '\n';
  }
  return out;
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << format_obj(mesh);
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace defmag
