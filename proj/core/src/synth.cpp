#include "defmag/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <Eigen/Geometry>

#include "defmag/error.hpp"
#include "defmag/icp.hpp"
#include "defmag/random.hpp"

namespace defmag {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0) {
  return mix(mix(mix(mix(seed) ^ a) ^ b) ^ c);
}

Vec3 unit_direction(double polar, double azimuth) {
  return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
}

RigidTransform random_pose(Rng& rng, double max_rotation_deg, double max_translation) {
  RigidTransform tf;
  if (max_rotation_deg > 0.0) {
    Vec3 axis(rng.normal(), rng.normal(), rng.normal());
    if (axis.norm() < 1e-12) axis = Vec3::UnitZ();
    const double angle = rng.uniform(0.0, max_rotation_deg) * kDeg;
    tf.rotation = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  }
  if (max_translation > 0.0) {
    Vec3 dir(rng.normal(), rng.normal(), rng.normal());
    if (dir.norm() < 1e-12) dir = Vec3::UnitX();
    tf.translation = dir.normalized() * rng.uniform(0.0, max_translation);
  }
  return tf;
}

struct CapTopology {
  std::vector<double> polar;    // per vertex
  std::vector<double> azimuth;  // per vertex
  std::vector<std::array<std::uint32_t, 3>> faces;
};

CapTopology cap_topology(const SynthSpec& spec) {
  CapTopology topo;
  const double cap = spec.cap_angle_deg * kDeg;
  topo.polar.push_back(0.0);
  topo.azimuth.push_back(0.0);
  for (std::size_t i = 1; i <= spec.rings; ++i) {
    for (std::size_t j = 0; j < spec.sectors; ++j) {
      topo.polar.push_back(cap * static_cast<double>(i) / static_cast<double>(spec.rings));
      topo.azimuth.push_back(2.0 * std::numbers::pi * static_cast<double>(j) /
                             static_cast<double>(spec.sectors));
    }
  }
  auto id = [&](std::size_t ring, std::size_t sector) {
    return static_cast<std::uint32_t>(1 + (ring - 1) * spec.sectors + sector % spec.sectors);
  };
  for (std::size_t j = 0; j < spec.sectors; ++j) topo.faces.push_back({0, id(1, j), id(1, j + 1)});
  for (std::size_t i = 1; i < spec.rings; ++i) {
    for (std::size_t j = 0; j < spec.sectors; ++j) {
      const auto a = id(i, j), b = id(i, j + 1), c = id(i + 1, j), d = id(i + 1, j + 1);
      topo.faces.push_back({a, c, b});
      topo.faces.push_back({b, c, d});
    }
  }
  return topo;
}

}  // namespace

std::array<ExpressionPattern, kNumExpressions> SynthSpec::default_patterns() {
  // Azimuth 90 deg points to the forehead, 270 deg to the chin.
  return {{
      {{{75.0, 0.45, 12.0, -2.0}, {105.0, 0.45, 12.0, -2.0}}},  // AN: brows drawn down
      {{{50.0, 0.30, 10.0, 2.0}, {130.0, 0.30, 10.0, 2.0}}},    // DI: nose wrinkle
      {{{60.0, 0.65, 12.0, 2.0}, {120.0, 0.65, 12.0, 2.0}}},    // FE: brows raised
      {{{215.0, 0.50, 12.0, 3.5}, {325.0, 0.50, 12.0, 3.5}}},   // HA: mouth corners
      {{{245.0, 0.40, 10.0, -2.0}, {295.0, 0.40, 10.0, -2.0}}}, // SA: lip corners down
      {{{270.0, 0.62, 14.0, -4.0}, {90.0, 0.70, 14.0, 2.0}}},   // SU: jaw drop, brows up
  }};
}

void SynthSpec::validate() const {
  if (!(head_radius > 0.0) || !(cap_angle_deg > 0.0 && cap_angle_deg < 180.0)) {
    throw UsageError("synth: head radius must be positive and the cap angle in (0, 180)");
  }
  if (rings < 1 || sectors < 3) throw UsageError("synth: need rings >= 1 and sectors >= 3");
  if (frames < 1 || sample_rate < 1) throw UsageError("synth: need frames >= 1 and a positive rate");
  if (!(0.0 <= onset_start && onset_start <= onset_end && onset_end <= offset_start &&
        offset_start <= offset_end && offset_end <= 1.0)) {
    throw UsageError("synth: envelope boundaries must be ordered within [0, 1]");
  }
  if (!(amplitude_scale >= 0.0) || !(noise_sigma >= 0.0)) {
    throw UsageError("synth: amplitude_scale and noise_sigma must be >= 0");
  }
  if (subjects < 1 || sequences_per_class < 1) throw UsageError("synth: need at least one subject and sequence");
  for (std::size_t a = 0; a < patterns.size(); ++a) {
    if (patterns[a].bumps.empty()) throw UsageError("synth: every class needs at least one bump");
    for (std::size_t b = a + 1; b < patterns.size(); ++b) {
      const auto& pa = patterns[a].bumps.front();
      const auto& pb = patterns[b].bumps.front();
      if (pa.azimuth_deg == pb.azimuth_deg && pa.polar_fraction == pb.polar_fraction) {
        throw UsageError("synth: classes must have distinct bump centres");
      }
    }
  }
}

std::vector<SynthSequenceInfo> synth_plan(const SynthSpec& spec) {
  std::vector<SynthSequenceInfo> plan;
  char buf[64];
  for (std::size_t s = 0; s < spec.subjects; ++s) {
    for (auto e : kAllExpressions) {
      for (std::size_t r = 0; r < spec.sequences_per_class; ++r) {
        SynthSequenceInfo info;
        std::snprintf(buf, sizeof buf, "S%03zu", s);
        info.subject = buf;
        std::snprintf(buf, sizeof buf, "S%03zu_%s_%02zu", s, std::string(to_string(e)).c_str(), r);
        info.name = buf;
        info.label = e;
        info.subject_index = s;
        info.repetition = r;
        plan.push_back(std::move(info));
      }
    }
  }
  return plan;
}

double synth_envelope(const SynthSpec& spec, std::size_t frame, double shift) {
  if (spec.frames < 2) return 0.0;
  const double x = static_cast<double>(frame) / static_cast<double>(spec.frames - 1);
  const double a = spec.onset_start + shift, b = spec.onset_end + shift;
  const double c = spec.offset_start + shift, d = spec.offset_end + shift;
  if (x < a || x > d) return 0.0;
  if (x < b) return 0.5 * (1.0 - std::cos(std::numbers::pi * (x - a) / (b - a)));
  if (x <= c) return 1.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (x - c) / (d - c)));
}

TriMesh synth_base_mesh(const SynthSpec& spec) {
  const auto topo = cap_topology(spec);
  TriMesh mesh;
  mesh.faces = topo.faces;
  mesh.vertices.reserve(topo.polar.size());
  for (std::size_t v = 0; v < topo.polar.size(); ++v) {
    const Vec3 n = unit_direction(topo.polar[v], topo.azimuth[v]);
    const double geo = spec.head_radius * topo.polar[v];
    const double nose =
        spec.nose_height * std::exp(-geo * geo / (2.0 * spec.nose_sigma * spec.nose_sigma));
    mesh.vertices.push_back((spec.head_radius + nose) * n);
  }
  return mesh;
}

std::vector<TriMesh> synth_sequence(const SynthSpec& spec, std::uint64_t seed,
                                    const SynthSequenceInfo& info) {
  spec.validate();
  const auto topo = cap_topology(spec);
  const double cap = spec.cap_angle_deg * kDeg;
  const auto label = static_cast<std::size_t>(info.label);

  // Subject-level draws (shared by every sequence of the subject).
  Rng subject_rng(derive_seed(seed, 1, info.subject_index));
  const double radius = spec.head_radius * std::max(0.5, 1.0 + spec.radius_jitter * subject_rng.normal());
  const RigidTransform pose =
      random_pose(subject_rng, spec.pose_rotation_deg, spec.pose_translation);
  const double subject_gain = std::max(0.2, 1.0 + spec.subject_gain_sigma * subject_rng.normal());
  std::array<std::vector<double>, kNumExpressions> az_jitter;
  for (std::size_t c = 0; c < kNumExpressions; ++c) {
    for (std::size_t b = 0; b < spec.patterns[c].bumps.size(); ++b) {
      az_jitter[c].push_back(spec.center_jitter_deg * subject_rng.normal());
    }
  }

  // Sequence-level draws.
  Rng rng(derive_seed(seed, 2, info.subject_index, label * 1000 + info.repetition));
  const double gain = subject_gain * std::max(0.2, 1.0 + spec.sequence_gain_sigma * rng.normal());
  const double shift = rng.uniform(-spec.timing_jitter, spec.timing_jitter);

  const auto& bumps = spec.patterns[label].bumps;
  std::vector<Vec3> centres;
  for (std::size_t b = 0; b < bumps.size(); ++b) {
    centres.push_back(unit_direction(bumps[b].polar_fraction * cap,
                                     (bumps[b].azimuth_deg + az_jitter[label][b]) * kDeg));
  }

  // Static geometry and the per-vertex pattern (displacement at full
  // envelope).
  const std::size_t nv = topo.polar.size();
  std::vector<Vec3> normals(nv), base(nv);
  std::vector<double> pattern(nv, 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    normals[v] = unit_direction(topo.polar[v], topo.azimuth[v]);
    const double geo = radius * topo.polar[v];
    const double nose = spec.nose_height * std::exp(-geo * geo / (2.0 * spec.nose_sigma * spec.nose_sigma));
    base[v] = (radius + nose) * normals[v];
    for (std::size_t b = 0; b < bumps.size(); ++b) {
      const double d = radius * std::acos(std::clamp(normals[v].dot(centres[b]), -1.0, 1.0));
      pattern[v] += bumps[b].amplitude * std::exp(-d * d / (2.0 * bumps[b].sigma * bumps[b].sigma));
    }
  }

  std::vector<TriMesh> frames(spec.frames);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const double amp = synth_envelope(spec, t, shift) * spec.amplitude_scale * gain;
    const RigidTransform motion =
        random_pose(rng, spec.head_motion_rotation_deg, spec.head_motion_translation);
    const RigidTransform tf = pose.compose(motion);
    TriMesh& mesh = frames[t];
    mesh.faces = topo.faces;
    mesh.vertices.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) {
      Vec3 p = base[v] + (amp * pattern[v]) * normals[v];
      if (spec.noise_sigma > 0.0) {
        p += Vec3(rng.normal(), rng.normal(), rng.normal()) * spec.noise_sigma;
      }
      mesh.vertices[v] = tf.apply(p);
    }
  }
  return frames;
}

SynthSpec SynthSpec::subtle() {
  SynthSpec s;
  s.amplitude_scale = 0.17;
  return s;
}

void write_synth_dataset(const SynthSpec& spec, std::uint64_t seed, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream labels(dir / "labels.csv", std::ios::binary);
  if (!labels) throw DataError("cannot write " + (dir / "labels.csv").string());
  labels << "path,label,subject\n";
  char buf[32];
  for (const auto& info : synth_plan(spec)) {
    const auto seq_dir = dir / info.name;
    fs::create_directories(seq_dir);
    const auto frames = synth_sequence(spec, seed, info);
    for (std::size_t t = 0; t < frames.size(); ++t) {
      std::snprintf(buf, sizeof buf, "frame_%04zu.obj", t);
      save_mesh(frames[t], seq_dir / buf);
    }
    labels << info.name << ',' << to_string(info.label) << ',' << info.subject << '\n';
  }
  if (!labels) throw DataError("failed writing labels.csv");
}

}  // namespace defmag
