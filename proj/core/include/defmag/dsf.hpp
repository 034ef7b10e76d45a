#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "defmag/grid.hpp"
#include "defmag/radial_curves.hpp"
#include "defmag/srvf.hpp"

namespace defmag {

/// Dense scalar field of one frame: grid(angle, sample) is the pointwise
/// norm of the shooting field between corresponding curves.
struct DsfField {
  Grid grid;
  std::int64_t frame_index = 0;
};

struct DsfSequence {
  std::vector<DsfField> frames;
  std::uint32_t sample_rate = 25;  ///< frames per second

  std::size_t num_frames() const { return frames.size(); }
  std::size_t num_curves() const { return frames.empty() ? 0 : frames.front().grid.rows(); }
  std::size_t samples() const { return frames.empty() ? 0 : frames.front().grid.cols(); }
  /// Throws DataError if frames disagree on grid shape.
  void validate() const;
};

/// Throws DataError when the fans disagree on curve or sample count.
DsfField dsf_between(const CurveFan& reference, const CurveFan& target,
                     const ShootingOptions& options = {});

/// Frame i compares frames[i] against frames[0]. Errors carry the frame
/// index.
DsfSequence dsf_sequence(std::span<const CurveFan> frames, std::uint32_t sample_rate,
                         const ShootingOptions& options = {});

/// DSF1 binary format: "DSF1", u32 frames, u32 curves, u32 samples,
/// u32 sample rate, then frames*curves*samples little-endian f64 values
/// (frame-major, angle-major, sample-minor).
void write_dsf(std::ostream& out, const DsfSequence& seq);
DsfSequence read_dsf(std::istream& in);
void save_dsf(const std::filesystem::path& path, const DsfSequence& seq);
DsfSequence load_dsf(const std::filesystem::path& path);

}  // namespace defmag
