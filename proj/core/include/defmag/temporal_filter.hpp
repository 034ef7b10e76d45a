#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace defmag {

/// Ideal DFT band-pass for many series of the same length. The kept bins
/// and their twiddle factors are computed once.
class IdealBandpass {
 public:
  IdealBandpass(std::size_t length, double sample_rate, double f_lo, double f_hi);

  std::size_t length() const { return length_; }
  /// DFT bin indices whose absolute frequency lies in [f_lo, f_hi].
  const std::vector<std::size_t>& kept_bins() const { return bins_; }

  /// Writes the filtered series into `out` (same length as `in`).
  void apply(std::span<const double> in, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> in) const;

 private:
  std::size_t length_;
  std::vector<std::size_t> bins_;
  std::vector<double> cos_;  // cos(2 pi j / n)
  std::vector<double> sin_;
};

/// Zeros every DFT bin whose frequency |f| (Hz) lies outside [f_lo, f_hi]
/// and returns the real part of the inverse transform. A single-sample
/// series returns zero.
std::vector<double> temporal_bandpass(std::span<const double> series, double sample_rate,
                                      double f_lo, double f_hi);

}  // namespace defmag
