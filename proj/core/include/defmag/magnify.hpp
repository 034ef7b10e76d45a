#pragma once

#include <cstddef>
#include <vector>

#include "defmag/dsf.hpp"
#include "defmag/pyramid.hpp"

namespace defmag {

struct MagnifyConfig {
  std::size_t levels = 4;
  double zeta = 10.0;   ///< amplification factor
  double gamma = 1.0;   ///< attenuation, in [0, 1]
  double band_lo = 0.3; ///< Hz
  double band_hi = 0.4; ///< Hz
  /// Optional per-level override of zeta (level 0 finest); empty means
  /// zeta on every level.
  std::vector<double> zeta_per_level;

  double zeta_for_level(std::size_t level) const;
  /// Throws UsageError unless 0 < band_lo < band_hi < rate/2, levels >= 1,
  /// zeta >= 0 and gamma in [0, 1].
  void validate(double sample_rate) const;
};

/// Laplacian pyramids of every frame, one stack per frame.
using PyramidStack = std::vector<Pyramid>;

PyramidStack build_pyramid_stack(const DsfSequence& seq, std::size_t levels);

/// Band-passes the time series of every pyramid coefficient in place.
void bandpass_stack(PyramidStack& stack, double sample_rate, double f_lo, double f_hi);

struct MagnifyResult {
  DsfSequence sequence;
  /// Entries that went negative after amplification and were set to 0.
  std::size_t clamped = 0;
};

/// chi_hat(i) = max(0, chi(i) + collapse(zeta_k * gamma * bandpass(pyramid(chi))(i)))
MagnifyResult magnify_sequence(const DsfSequence& seq, const MagnifyConfig& cfg);

}  // namespace defmag
