#include "defmag/dsf.hpp"

#include <fstream>
#include <string>

#include "binary_io.hpp"
#include "defmag/error.hpp"

namespace defmag {

void DsfSequence::validate() const {
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (!frames[i].grid.same_shape(frames[0].grid)) {
      throw DataError("frame " + std::to_string(i) + " has a different grid shape");
    }
  }
}

DsfField dsf_between(const CurveFan& reference, const CurveFan& target,
                     const ShootingOptions& options) {
  if (reference.num_curves() != target.num_curves() || reference.samples != target.samples) {
    throw DataError("curve fans differ in shape: " + std::to_string(reference.num_curves()) +
                    "x" + std::to_string(reference.samples) + " vs " +
                    std::to_string(target.num_curves()) + "x" + std::to_string(target.samples));
  }
  DsfField field;
  field.grid = Grid(reference.num_curves(), reference.samples);
  for (std::size_t a = 0; a < reference.num_curves(); ++a) {
    const auto& c_ref = reference.curves[a];
    const auto& c_tgt = target.curves[a];
    if (c_ref.degenerate || c_tgt.degenerate) continue;
    if (c_ref.points.size() != reference.samples || c_tgt.points.size() != reference.samples) {
      throw DataError("curve " + std::to_string(a) + " has the wrong number of samples");
    }
    const Srvf q1 = srvf_of_curve(c_ref);
    const Srvf q2 = srvf_of_curve(c_tgt);
    if (q1.degenerate || q2.degenerate) continue;
    const ShootingField v = shooting_vector(q1, q2, options);
    for (std::size_t r = 0; r < reference.samples; ++r) field.grid(a, r) = v.values[r].norm();
  }
  return field;
}

DsfSequence dsf_sequence(std::span<const CurveFan> frames, std::uint32_t sample_rate,
                         const ShootingOptions& options) {
  if (frames.empty()) throw DataError("a DSF sequence needs at least one frame");
  DsfSequence seq;
  seq.sample_rate = sample_rate;
  seq.frames.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    try {
      DsfField f = i == 0 ? DsfField{Grid(frames[0].num_curves(), frames[0].samples), 0}
                          : dsf_between(frames[0], frames[i], options);
      f.frame_index = static_cast<std::int64_t>(i);
      seq.frames.push_back(std::move(f));
    } catch (const NumericalError& e) {
      throw NumericalError("frame " + std::to_string(i) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("frame " + std::to_string(i) + ": " + e.what());
    }
  }
  return seq;
}

void write_dsf(std::ostream& out, const DsfSequence& seq) {
  seq.validate();
  out.write("DSF1", 4);
  detail::write_u32(out, static_cast<std::uint32_t>(seq.num_frames()));
  detail::write_u32(out, static_cast<std::uint32_t>(seq.num_curves()));
  detail::write_u32(out, static_cast<std::uint32_t>(seq.samples()));
  detail::write_u32(out, seq.sample_rate);
  for (const auto& f : seq.frames) {
    for (double v : f.grid.values()) detail::write_f64(out, v);
  }
}

DsfSequence read_dsf(std::istream& in) {
  detail::expect_magic(in, "DSF1");
  const auto n = detail::read_u32(in);
  const auto rows = detail::read_u32(in);
  const auto cols = detail::read_u32(in);
  DsfSequence seq;
  seq.sample_rate = detail::read_u32(in);
  seq.frames.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    seq.frames[i].frame_index = i;
    seq.frames[i].grid = Grid(rows, cols);
    for (double& v : seq.frames[i].grid.values()) v = detail::read_f64(in);
  }
  return seq;
}

void save_dsf(const std::filesystem::path& path, const DsfSequence& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_dsf(out, seq);
  if (!out) throw DataError("failed writing " + path.string());
}

DsfSequence load_dsf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_dsf(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace defmag
