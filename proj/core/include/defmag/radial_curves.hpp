#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "defmag/mesh.hpp"

namespace defmag {

/// Surface curve leaving the nose tip at angle `angle` (radians, [0, 2pi)),
/// resampled uniformly in arc length. points.front() is the origin.
struct RadialCurve {
  double angle = 0.0;
  std::vector<Vec3> points;
  /// Set when the cut found no surface; points are then all the origin.
  bool degenerate = false;

  double arc_length() const;
};

/// Curves at angles 2*pi*k/num_curves, k = 0..num_curves-1.
struct CurveFan {
  Vec3 origin = Vec3::Zero();
  std::vector<RadialCurve> curves;
  std::size_t samples = 0;

  std::size_t num_curves() const { return curves.size(); }
  std::size_t degenerate_count() const;
};

struct ExtractOptions {
  /// Out-of-face direction; the cutting half-planes contain this axis.
  Vec3 axis = Vec3::UnitZ();
  /// Direction of alpha = 0. Projected onto the plane orthogonal to `axis`.
  Vec3 reference = Vec3::UnitX();
};

/// Cuts `mesh` with the half-planes bounded by the line (origin, axis),
/// orders the intersection points by distance from the axis, prepends the
/// origin and resamples each cut to `samples` points. Throws UsageError
/// for num_curves < 1 or samples < 2.
CurveFan extract_radial_curves(const TriMesh& mesh, const Vec3& origin,
                               std::size_t num_curves, std::size_t samples,
                               const ExtractOptions& options = {});

/// Resamples a polyline to `samples` points equally spaced in arc length.
/// A polyline of zero length yields `samples` copies of its first point.
std::vector<Vec3> resample_uniform(std::span<const Vec3> polyline,
                                   std::size_t samples);

/// FAN1 binary container for the fans of one sequence (little-endian):
/// "FAN1", u32 frames, u32 curves, u32 samples, then per frame the origin
/// (3 f64), one u8 degenerate flag per curve and curves*samples*3 f64.
void save_fans(const std::filesystem::path& path, std::span<const CurveFan> fans);
std::vector<CurveFan> load_fans(const std::filesystem::path& path);

}  // namespace defmag
