#include "defmag/temporal_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "defmag/error.hpp"

namespace defmag {

IdealBandpass::IdealBandpass(std::size_t length, double sample_rate, double f_lo, double f_hi)
    : length_(length) {
  if (!(sample_rate > 0.0)) throw UsageError("sample rate must be positive");
  if (f_lo < 0.0 || f_hi < f_lo) throw UsageError("band must satisfy 0 <= f_lo <= f_hi");
  if (length < 2) return;

  // Bin frequencies k*rate/n are compared with a tolerance so that band
  // edges given in decimal (0.3, 0.4) still include the matching bins.
  const double tol = 1e-12 * sample_rate;
  const double n = static_cast<double>(length);
  for (std::size_t k = 0; k < length; ++k) {
    const double kk = static_cast<double>(k <= length / 2 ? k : length - k);
    const double f = kk * sample_rate / n;
    if (f >= f_lo - tol && f <= f_hi + tol) bins_.push_back(k);
  }
  cos_.resize(length);
  sin_.resize(length);
  for (std::size_t j = 0; j < length; ++j) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / n;
    cos_[j] = std::cos(phi);
    sin_[j] = std::sin(phi);
  }
}

void IdealBandpass::apply(std::span<const double> in, std::span<double> out) const {
  if (in.size() != length_ || out.size() != length_) {
    throw DataError("series length does not match the filter");
  }
  std::fill(out.begin(), out.end(), 0.0);
  if (length_ < 2) return;
  const std::size_t n = length_;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k : bins_) {
    double re = 0.0, im = 0.0;
    std::size_t phase = 0;
    for (std::size_t t = 0; t < n; ++t) {
      re += in[t] * cos_[phase];
      im -= in[t] * sin_[phase];
      phase += k;
      if (phase >= n) phase -= n;
    }
    re *= inv_n;
    im *= inv_n;
    phase = 0;
    for (std::size_t t = 0; t < n; ++t) {
      out[t] += re * cos_[phase] - im * sin_[phase];
      phase += k;
      if (phase >= n) phase -= n;
    }
  }
}

std::vector<double> IdealBandpass::apply(std::span<const double> in) const {
  std::vector<double> out(in.size());
  apply(in, out);
  return out;
}

std::vector<double> temporal_bandpass(std::span<const double> series, double sample_rate,
                                      double f_lo, double f_hi) {
  return IdealBandpass(series.size(), sample_rate, f_lo, f_hi).apply(series);
}

}  // namespace defmag
