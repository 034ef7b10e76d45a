#include "defmag/srvf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "defmag/error.hpp"

namespace defmag {

double inner_product(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.size() != b.size()) throw DataError("inner product of fields with different sizes");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s / static_cast<double>(a.size());
}

double l2_norm(const std::vector<Vec3>& a) { return std::sqrt(inner_product(a, a)); }

Srvf srvf_of_points(const std::vector<Vec3>& points, const SrvfOptions& options) {
  const std::size_t n = points.size();
  if (n < 2) throw DataError("an SRVF needs at least two curve samples");

  // Derivative with respect to t in [0, 1], h = 1/(n-1): central differences
  // inside, second-order one-sided stencils at the ends (first order if n == 2).
  const double inv_h = static_cast<double>(n - 1);
  std::vector<Vec3> vel(n);
  if (n == 2) {
    vel[0] = vel[1] = (points[1] - points[0]) * inv_h;
  } else {
    for (std::size_t i = 1; i + 1 < n; ++i) vel[i] = (points[i + 1] - points[i - 1]) * (0.5 * inv_h);
    vel[0] = (-3.0 * points[0] + 4.0 * points[1] - points[2]) * (0.5 * inv_h);
    vel[n - 1] = (3.0 * points[n - 1] - 4.0 * points[n - 2] + points[n - 3]) * (0.5 * inv_h);
  }

  Srvf q;
  q.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double speed = vel[i].norm();
    q.values[i] = speed < options.speed_epsilon ? Vec3::Zero() : Vec3(vel[i] / std::sqrt(speed));
  }
  const double norm = l2_norm(q.values);
  if (!(norm > 0.0)) {
    q.degenerate = true;
    std::fill(q.values.begin(), q.values.end(), Vec3::Zero());
    return q;
  }
  for (auto& v : q.values) v /= norm;
  return q;
}

Srvf srvf_of_curve(const RadialCurve& curve, const SrvfOptions& options) {
  return srvf_of_points(curve.points, options);
}

namespace {

// Angle between unit vectors: acos of the clamped inner product, evaluated
// as 2 atan2(|q1 - q2|, |q1 + q2|) so it stays exact near 0 and pi.
double angle_between(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.size() != b.size()) {
    throw DataError("SRVFs differ in sample count: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  double diff = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]).squaredNorm();
    sum += (a[i] + b[i]).squaredNorm();
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

}  // namespace

double geodesic_distance(const Srvf& q1, const Srvf& q2) { return angle_between(q1.values, q2.values); }

ShootingField shooting_vector(const Srvf& q1, const Srvf& q2, const ShootingOptions& options) {
  const double theta = angle_between(q1.values, q2.values);

  ShootingField field;
  field.values.assign(q1.size(), Vec3::Zero());
  if (theta < options.theta_epsilon) return field;
  if (std::numbers::pi - theta < options.antipodal_epsilon) {
    throw NumericalError("antipodal pair: the geodesic between the SRVFs is not unique");
  }
  // theta * (q2 - cos(theta) q1) / |q2 - cos(theta) q1|
  const double cos_theta = std::clamp(inner_product(q1.values, q2.values), -1.0, 1.0);
  for (std::size_t i = 0; i < q1.size(); ++i) field.values[i] = q2.values[i] - cos_theta * q1.values[i];
  const double norm = l2_norm(field.values);
  if (!(norm > 0.0)) {
    std::fill(field.values.begin(), field.values.end(), Vec3::Zero());
    return field;
  }
  for (auto& v : field.values) v *= theta / norm;
  field.theta = theta;
  return field;
}

}  // namespace defmag
