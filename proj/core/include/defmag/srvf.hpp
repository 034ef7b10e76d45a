#pragma once

#include <vector>

#include "defmag/mesh.hpp"
#include "defmag/radial_curves.hpp"

namespace defmag {

/// Square-root velocity function sampled on the uniform grid of [0, 1],
/// scaled to unit L2 norm (quadrature weights 1/T).
struct Srvf {
  std::vector<Vec3> values;
  /// The curve had no velocity anywhere; values are zero and the norm is 0.
  bool degenerate = false;

  std::size_t size() const { return values.size(); }
};

/// Initial velocity of the great-circle geodesic from q1 towards q2.
struct ShootingField {
  std::vector<Vec3> values;
  double theta = 0.0;
};

struct SrvfOptions {
  double speed_epsilon = 1e-12;
};

struct ShootingOptions {
  /// Below this geodesic length the zero field is returned.
  double theta_epsilon = 1e-8;
  /// Pairs with pi - theta below this are rejected as antipodal.
  double antipodal_epsilon = 1e-8;
};

/// L2 inner product with uniform weights 1/T.
double inner_product(const std::vector<Vec3>& a, const std::vector<Vec3>& b);
double l2_norm(const std::vector<Vec3>& a);

Srvf srvf_of_points(const std::vector<Vec3>& points, const SrvfOptions& options = {});
Srvf srvf_of_curve(const RadialCurve& curve, const SrvfOptions& options = {});

/// arccos of the clamped inner product. Both arguments must have the same
/// sample count (DataError otherwise).
double geodesic_distance(const Srvf& q1, const Srvf& q2);

/// Throws NumericalError("antipodal pair") when theta is within
/// antipodal_epsilon of pi.
ShootingField shooting_vector(const Srvf& q1, const Srvf& q2,
                              const ShootingOptions& options = {});

}  // namespace defmag
