#include "defmag/magnify.hpp"

#include <sstream>

#include "defmag/error.hpp"
#include "defmag/temporal_filter.hpp"

namespace defmag {

double MagnifyConfig::zeta_for_level(std::size_t level) const {
  return zeta_per_level.empty() ? zeta : zeta_per_level.at(level);
}

void MagnifyConfig::validate(double sample_rate) const {
  std::ostringstream err;
  if (levels < 1) err << "levels must be >= 1; ";
  if (!(zeta >= 0.0)) err << "zeta must be >= 0; ";
  if (!(gamma >= 0.0 && gamma <= 1.0)) err << "gamma must lie in [0, 1]; ";
  if (!(band_lo > 0.0 && band_lo < band_hi && band_hi < sample_rate / 2.0)) {
    err << "band (" << band_lo << ", " << band_hi << ") must satisfy 0 < lo < hi < "
        << sample_rate / 2.0 << " Hz; ";
  }
  if (!zeta_per_level.empty()) {
    if (zeta_per_level.size() != levels) err << "zeta_per_level needs one entry per level; ";
    for (double z : zeta_per_level) {
      if (!(z >= 0.0)) err << "zeta_per_level entries must be >= 0; ";
    }
  }
  const auto msg = err.str();
  if (!msg.empty()) throw UsageError("invalid magnification config: " + msg.substr(0, msg.size() - 2));
}

PyramidStack build_pyramid_stack(const DsfSequence& seq, std::size_t levels) {
  PyramidStack stack;
  stack.reserve(seq.num_frames());
  for (const auto& f : seq.frames) stack.push_back(build_pyramid(f.grid, levels));
  return stack;
}

void bandpass_stack(PyramidStack& stack, double sample_rate, double f_lo, double f_hi) {
  if (stack.empty()) return;
  const std::size_t n = stack.size();
  const IdealBandpass filter(n, sample_rate, f_lo, f_hi);
  std::vector<double> series(n), filtered(n);
  for (std::size_t level = 0; level < stack.front().size(); ++level) {
    const std::size_t count = stack.front().levels[level].size();
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t t = 0; t < n; ++t) series[t] = stack[t].levels[level].values()[i];
      filter.apply(series, filtered);
      for (std::size_t t = 0; t < n; ++t) stack[t].levels[level].values()[i] = filtered[t];
    }
  }
}

MagnifyResult magnify_sequence(const DsfSequence& seq, const MagnifyConfig& cfg) {
  if (seq.frames.empty()) throw DataError("cannot magnify an empty sequence");
  seq.validate();
  cfg.validate(static_cast<double>(seq.sample_rate));

  PyramidStack stack = build_pyramid_stack(seq, cfg.levels);
  bandpass_stack(stack, static_cast<double>(seq.sample_rate), cfg.band_lo, cfg.band_hi);

  MagnifyResult result;
  result.sequence.sample_rate = seq.sample_rate;
  result.sequence.frames.reserve(seq.num_frames());
  for (std::size_t t = 0; t < seq.num_frames(); ++t) {
    Pyramid& p = stack[t];
    for (std::size_t level = 0; level < p.size(); ++level) {
      const double gain = cfg.zeta_for_level(level) * cfg.gamma;
      for (double& v : p.levels[level].values()) v *= gain;
    }
    const Grid amplified = collapse_pyramid(p);
    DsfField out = seq.frames[t];
    auto values = out.grid.values();
    const auto add = amplified.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] += add[i];
      if (values[i] < 0.0) {
        values[i] = 0.0;
        ++result.clamped;
      }
    }
    result.sequence.frames.push_back(std::move(out));
  }
  return result;
}

}  // namespace defmag
