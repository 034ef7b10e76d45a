#include "defmag/radial_curves.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/Geometry>

#include "binary_io.hpp"
#include "defmag/error.hpp"

namespace defmag {
namespace {

struct CutPoint {
  double u;  // distance from the axis inside the half-plane
  double w;  // height along the axis
  Vec3 p;
};

}  // namespace

double RadialCurve::arc_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
  return len;
}

std::size_t CurveFan::degenerate_count() const {
  return static_cast<std::size_t>(
      std::count_if(curves.begin(), curves.end(), [](const auto& c) { return c.degenerate; }));
}

std::vector<Vec3> resample_uniform(std::span<const Vec3> polyline, std::size_t samples) {
  if (samples < 2) throw UsageError("resampling needs at least 2 samples");
  if (polyline.empty()) throw DataError("cannot resample an empty polyline");

  std::vector<double> cum(polyline.size(), 0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    cum[i] = cum[i - 1] + (polyline[i] - polyline[i - 1]).norm();
  }
  const double total = cum.back();
  std::vector<Vec3> out(samples, polyline.front());
  if (!(total > 0.0)) return out;

  std::size_t seg = 1;
  for (std::size_t i = 1; i + 1 < samples; ++i) {
    const double s = total * static_cast<double>(i) / static_cast<double>(samples - 1);
    while (seg + 1 < polyline.size() && cum[seg] < s) ++seg;
    const double len = cum[seg] - cum[seg - 1];
    const double t = len > 0.0 ? std::clamp((s - cum[seg - 1]) / len, 0.0, 1.0) : 0.0;
    out[i] = polyline[seg - 1] + t * (polyline[seg] - polyline[seg - 1]);
  }
  out.back() = polyline.back();
  return out;
}

CurveFan extract_radial_curves(const TriMesh& mesh, const Vec3& origin, std::size_t num_curves,
                               std::size_t samples, const ExtractOptions& options) {
  if (num_curves < 1) throw UsageError("need at least one curve");
  if (samples < 2) throw UsageError("need at least two samples per curve");
  if (mesh.vertices.size() < 3) throw DataError("curve extraction needs at least 3 vertices");

  const Vec3 axis = options.axis.normalized();
  Vec3 e0 = options.reference - options.reference.dot(axis) * axis;
  if (e0.norm() < 1e-12) throw UsageError("reference direction is parallel to the axis");
  e0.normalize();
  const Vec3 e1 = axis.cross(e0);

  const std::size_t nv = mesh.vertices.size();
  std::vector<Vec3> rel(nv);
  double scale = 0.0;
  for (std::size_t i = 0; i < nv; ++i) {
    rel[i] = mesh.vertices[i] - origin;
    scale = std::max(scale, rel[i].norm());
  }
  const double eps = 1e-12 * std::max(scale, 1.0);
  const double merge_tol = 1e-9 * std::max(scale, 1.0);

  CurveFan fan;
  fan.origin = origin;
  fan.samples = samples;
  fan.curves.resize(num_curves);

  std::vector<double> dist(nv), along(nv);
  std::vector<CutPoint> cut;
  std::vector<Vec3> polyline;

  for (std::size_t k = 0; k < num_curves; ++k) {
    const double alpha = 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(num_curves);
    const Vec3 dir = std::cos(alpha) * e0 + std::sin(alpha) * e1;
    const Vec3 normal = dir.cross(axis);
    for (std::size_t i = 0; i < nv; ++i) {
      dist[i] = rel[i].dot(normal);
      along[i] = rel[i].dot(dir);
    }

    cut.clear();
    auto add = [&](const Vec3& r) {
      const double u = r.dot(dir);
      if (u >= -eps) cut.push_back({std::max(u, 0.0), r.dot(axis), r});
    };
    for (std::size_t i = 0; i < nv; ++i) {
      if (std::abs(dist[i]) <= eps && along[i] >= -eps) add(rel[i]);
    }
    for (const auto& tri : mesh.faces) {
      const double d0 = dist[tri[0]], d1 = dist[tri[1]], d2 = dist[tri[2]];
      if ((d0 > eps && d1 > eps && d2 > eps) || (d0 < -eps && d1 < -eps && d2 < -eps)) continue;
      if (along[tri[0]] < 0 && along[tri[1]] < 0 && along[tri[2]] < 0) continue;
      for (int e = 0; e < 3; ++e) {
        const auto a = tri[e], b = tri[(e + 1) % 3];
        const double da = dist[a], db = dist[b];
        if ((da > eps && db < -eps) || (da < -eps && db > eps)) {
          const double t = da / (da - db);
          add(rel[a] + t * (rel[b] - rel[a]));
        }
      }
    }

    std::sort(cut.begin(), cut.end(), [](const CutPoint& x, const CutPoint& y) {
      if (x.u != y.u) return x.u < y.u;
      return x.w > y.w;
    });

    polyline.clear();
    polyline.push_back(Vec3::Zero());
    for (const auto& c : cut) {
      if ((c.p - polyline.back()).norm() > merge_tol) polyline.push_back(c.p);
    }

    RadialCurve& curve = fan.curves[k];
    curve.angle = alpha;
    if (polyline.size() < 2) {
      curve.degenerate = true;
      curve.points.assign(samples, origin);
      continue;
    }
    curve.points = resample_uniform(polyline, samples);
    for (auto& p : curve.points) p += origin;
    curve.points.front() = origin;
  }
  return fan;
}

void save_fans(const std::filesystem::path& path, std::span<const CurveFan> fans) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const std::uint32_t curves = fans.empty() ? 0 : static_cast<std::uint32_t>(fans[0].num_curves());
  const std::uint32_t samples = fans.empty() ? 0 : static_cast<std::uint32_t>(fans[0].samples);
  out.write("FAN1", 4);
  detail::write_u32(out, static_cast<std::uint32_t>(fans.size()));
  detail::write_u32(out, curves);
  detail::write_u32(out, samples);
  for (const auto& fan : fans) {
    if (fan.num_curves() != curves || fan.samples != samples) {
      throw DataError("fans of one sequence must share curve and sample counts");
    }
    for (int k = 0; k < 3; ++k) detail::write_f64(out, fan.origin[k]);
    for (const auto& c : fan.curves) out.put(c.degenerate ? 1 : 0);
    for (const auto& c : fan.curves) {
      for (const auto& p : c.points) {
        for (int k = 0; k < 3; ++k) detail::write_f64(out, p[k]);
      }
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<CurveFan> load_fans(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  detail::expect_magic(in, "FAN1");
  const auto frames = detail::read_u32(in);
  const auto curves = detail::read_u32(in);
  const auto samples = detail::read_u32(in);
  std::vector<CurveFan> fans(frames);
  for (auto& fan : fans) {
    fan.samples = samples;
    for (int k = 0; k < 3; ++k) fan.origin[k] = detail::read_f64(in);
    fan.curves.resize(curves);
    for (std::uint32_t c = 0; c < curves; ++c) {
      const int flag = in.get();
      if (flag == std::char_traits<char>::eof()) throw DataError("unexpected end of file");
      fan.curves[c].degenerate = flag != 0;
      fan.curves[c].angle =
          2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(curves);
    }
    for (auto& c : fan.curves) {
      c.points.resize(samples);
      for (auto& p : c.points) {
        for (int k = 0; k < 3; ++k) p[k] = detail::read_f64(in);
      }
    }
  }
  return fans;
}

}  // namespace defmag
