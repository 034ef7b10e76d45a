#include "defmag/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "defmag/error.hpp"

namespace defmag {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw UsageError("config key '" + std::string(key) + "': invalid value '" + std::string(value) + "'");
  }
  return out;
}

Vec3 parse_vec3(std::string_view key, std::string_view value) {
  Vec3 v;
  for (int k = 0; k < 3; ++k) {
    const auto comma = value.find(',');
    if ((k < 2) == (comma == std::string_view::npos)) {
      throw UsageError("config key '" + std::string(key) + "': expected x,y,z");
    }
    v[k] = parse_number<double>(key, trim(value.substr(0, comma)));
    value = k < 2 ? value.substr(comma + 1) : std::string_view{};
  }
  return v;
}

}  // namespace

std::string_view to_string(ClassifierKind kind) { return kind == ClassifierKind::Svm ? "svm" : "hmm"; }

ClassifierKind parse_classifier(std::string_view text) {
  if (text == "svm") return ClassifierKind::Svm;
  if (text == "hmm") return ClassifierKind::Hmm;
  throw UsageError("classifier must be svm or hmm, got '" + std::string(text) + "'");
}

void validate_config(const PipelineConfig& cfg) {
  if (cfg.curves < 1) throw UsageError("curves must be at least 1");
  if (cfg.samples < 2) throw UsageError("samples must be at least 2");
  if (!(cfg.crop_radius > 0.0)) throw UsageError("crop_radius must be positive");
  if (cfg.rate < 1) throw UsageError("rate must be positive");
  if (cfg.states < 1) throw UsageError("states must be at least 1");
  if (cfg.folds < 2) throw UsageError("folds must be at least 2");
  if (cfg.pool.angle_blocks < 1 || cfg.pool.radius_blocks < 1) throw UsageError("pool blocks must be positive");
  if (cfg.pool.angle_blocks > cfg.curves || cfg.pool.radius_blocks > cfg.samples) {
    throw UsageError("pool grid is larger than the field grid");
  }
  cfg.magnify.validate(static_cast<double>(cfg.rate));
}

void apply_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  auto num = [&]<class T>(T& out) { out = parse_number<T>(key, value); };
  if (key == "curves") num(cfg.curves);
  else if (key == "samples") num(cfg.samples);
  else if (key == "crop_radius") num(cfg.crop_radius);
  else if (key == "nose") cfg.nose = parse_vec3(key, value);
  else if (key == "zeta") num(cfg.magnify.zeta);
  else if (key == "gamma") num(cfg.magnify.gamma);
  else if (key == "levels") num(cfg.magnify.levels);
  else if (key == "band_lo") num(cfg.magnify.band_lo);
  else if (key == "band_hi") num(cfg.magnify.band_hi);
  else if (key == "rate") {
    num(cfg.rate);
    cfg.synth.sample_rate = cfg.rate;
  } else if (key == "classifier") cfg.classifier = parse_classifier(value);
  else if (key == "states") num(cfg.states);
  else if (key == "pool") cfg.pool = parse_pool(value);
  else if (key == "folds") num(cfg.folds);
  else if (key == "seed") num(cfg.seed);
  else if (key == "threads") num(cfg.threads);
  else if (key == "svm_c") num(cfg.svm.c);
  else if (key == "svm_epochs") num(cfg.svm.epochs);
  else if (key == "hmm_iterations") num(cfg.hmm.max_iterations);
  else if (key == "hmm_tolerance") num(cfg.hmm.tolerance);
  else if (key == "variance_floor") num(cfg.hmm.variance_floor);
  else if (key == "icp_iterations") num(cfg.icp.max_iterations);
  else if (key == "synth_subjects") num(cfg.synth.subjects);
  else if (key == "synth_sequences") num(cfg.synth.sequences_per_class);
  else if (key == "synth_frames") num(cfg.synth.frames);
  else if (key == "synth_amplitude") num(cfg.synth.amplitude_scale);
  else if (key == "synth_noise") num(cfg.synth.noise_sigma);
  else throw UsageError("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(PipelineConfig& cfg, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  PipelineConfig cfg;
  apply_config_text(cfg, ss.str());
  return cfg;
}

std::string format_config(const PipelineConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "curves = " << cfg.curves << '\n'
      << "samples = " << cfg.samples << '\n'
      << "crop_radius = " << cfg.crop_radius << '\n';
  if (cfg.nose) out << "nose = " << (*cfg.nose)[0] << ',' << (*cfg.nose)[1] << ',' << (*cfg.nose)[2] << '\n';
  out << "zeta = " << cfg.magnify.zeta << '\n'
      << "gamma = " << cfg.magnify.gamma << '\n'
      << "levels = " << cfg.magnify.levels << '\n'
      << "band_lo = " << cfg.magnify.band_lo << '\n'
      << "band_hi = " << cfg.magnify.band_hi << '\n'
      << "rate = " << cfg.rate << '\n'
      << "classifier = " << to_string(cfg.classifier) << '\n'
      << "states = " << cfg.states << '\n'
      << "pool = " << cfg.pool.angle_blocks << 'x' << cfg.pool.radius_blocks << '\n'
      << "folds = " << cfg.folds << '\n'
      << "seed = " << cfg.seed << '\n';
  return out.str();
}

}  // namespace defmag
