#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "defmag/expression.hpp"
#include "defmag/mesh.hpp"

namespace defmag {

/// Gaussian displacement along the surface normal. The centre is given by
/// its azimuth around the apex and its polar angle as a fraction of the
/// cap angle.
struct Bump {
  double azimuth_deg = 0.0;
  double polar_fraction = 0.5;
  double sigma = 12.0;     ///< geodesic standard deviation, mm
  double amplitude = 2.0;  ///< peak displacement, mm
};

struct ExpressionPattern {
  std::vector<Bump> bumps;
};

/// Generator of synthetic expression sequences: a spherical cap with a
/// nose, displaced by class-specific bumps that follow an onset / apex /
/// offset envelope over time.
struct SynthSpec {
  // Base surface.
  double head_radius = 100.0;   ///< mm
  double cap_angle_deg = 70.0;  ///< polar extent of the generated cap
  std::size_t rings = 28;
  std::size_t sectors = 64;
  double nose_height = 20.0;
  double nose_sigma = 15.0;

  std::array<ExpressionPattern, kNumExpressions> patterns = default_patterns();

  // Temporal envelope, as fractions of the sequence length.
  std::size_t frames = 75;
  std::uint32_t sample_rate = 25;
  double onset_start = 0.10;
  double onset_end = 0.35;
  double offset_start = 0.65;
  double offset_end = 0.90;
  double timing_jitter = 0.04;  ///< uniform shift of the envelope, fraction

  double amplitude_scale = 1.0;  ///< global multiplier of every bump
  double noise_sigma = 0.05;     ///< per-vertex isotropic jitter, mm

  // Variability.
  std::size_t subjects = 10;
  std::size_t sequences_per_class = 2;
  double subject_gain_sigma = 0.15;      ///< relative spread of the amplitude
  double sequence_gain_sigma = 0.10;
  double center_jitter_deg = 4.0;        ///< per-subject shift of bump azimuths
  double radius_jitter = 0.02;           ///< relative spread of head radius
  double pose_rotation_deg = 3.0;        ///< per-subject rigid perturbation
  double pose_translation = 3.0;         ///< mm
  double head_motion_rotation_deg = 0.0; ///< per-frame rigid jitter
  double head_motion_translation = 0.0;

  static std::array<ExpressionPattern, kNumExpressions> default_patterns();
  /// Defaults with amplitude_scale lowered until unmagnified accuracy drops
  /// to roughly 60-85%.
  static SynthSpec subtle();
  /// Throws UsageError on inconsistent settings.
  void validate() const;
};

struct SynthSequenceInfo {
  std::string name;
  Expression label = Expression::AN;
  std::string subject;
  std::size_t subject_index = 0;
  std::size_t repetition = 0;
};

/// All sequences of the dataset, subject-major then class then repetition.
std::vector<SynthSequenceInfo> synth_plan(const SynthSpec& spec);

/// Envelope value in [0, 1] at `frame`, with the onset/apex/offset
/// boundaries shifted by `shift` (fraction of the sequence length).
double synth_envelope(const SynthSpec& spec, std::size_t frame, double shift = 0.0);

/// Frames of one sequence. Deterministic in (spec, seed, info).
std::vector<TriMesh> synth_sequence(const SynthSpec& spec, std::uint64_t seed,
                                    const SynthSequenceInfo& info);

/// Undeformed, unperturbed cap with its nose (frame geometry at envelope 0).
TriMesh synth_base_mesh(const SynthSpec& spec);

/// Writes `<dir>/<name>/frame_NNNN.obj` for every sequence and
/// `<dir>/labels.csv` with columns path,label,subject.
void write_synth_dataset(const SynthSpec& spec, std::uint64_t seed, const std::filesystem::path& dir);

}  // namespace defmag
