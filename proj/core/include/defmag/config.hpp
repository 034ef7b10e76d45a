#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "defmag/features.hpp"
#include "defmag/hmm.hpp"
#include "defmag/icp.hpp"
#include "defmag/magnify.hpp"
#include "defmag/svm.hpp"
#include "defmag/synth.hpp"

namespace defmag {

enum class ClassifierKind { Svm, Hmm };

std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier(std::string_view text);

/// Pipeline settings. The defaults are the reference experimental setup:
/// 200 curves x 50 samples, zeta 10, gamma 1, 4 levels, 0.3-0.4 Hz at 25
/// fps, 10 folds.
struct PipelineConfig {
  std::size_t curves = 200;
  std::size_t samples = 50;
  double crop_radius = 100.0;
  std::optional<Vec3> nose;  ///< overrides nose-tip detection on frame 0
  IcpOptions icp;

  std::uint32_t rate = 25;
  MagnifyConfig magnify;

  ClassifierKind classifier = ClassifierKind::Hmm;
  int states = 3;
  PoolGrid pool;
  int folds = 10;
  std::uint64_t seed = 42;
  SvmOptions svm;
  HmmOptions hmm;

  unsigned threads = 0;  ///< 0 = hardware concurrency

  SynthSpec synth;

  HmmOptions hmm_options() const {
    HmmOptions o = hmm;
    o.states = states;
    return o;
  }
  SvmOptions svm_options() const {
    SvmOptions o = svm;
    o.seed = seed;
    return o;
  }
};

/// Throws UsageError on out-of-range settings.
void validate_config(const PipelineConfig& cfg);

/// Applies one `key = value` setting. Throws UsageError on unknown keys or
/// bad values.
void apply_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value);

/// Flat text format: one `key = value` per line, `#` starts a comment.
void apply_config_text(PipelineConfig& cfg, std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical dump of every key, loadable by load_config.
std::string format_config(const PipelineConfig& cfg);

}  // namespace defmag
