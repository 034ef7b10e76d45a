#include "defmag/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "defmag/error.hpp"
#include "defmag/features.hpp"
#include "defmag/icp.hpp"
#include "defmag/magnify.hpp"
#include "defmag/report.hpp"
#include "defmag/synth.hpp"
#include "json.hpp"

namespace defmag {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kClasses = static_cast<int>(kNumExpressions);

template <class F>
auto with_context(const std::string& ctx, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UsageError& e) {
    throw UsageError(ctx + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(ctx + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(ctx + ": " + e.what());
  }
}

// Runs body(i) for i in [0, n) on up to `threads` workers. The first
// failure in index order is rethrown.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::atomic<std::size_t>& next) {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::atomic<std::size_t> next{0};
  if (threads <= 1) {
    work(next);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, std::ref(next));
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::VectorXd row = m.row(r).transpose();
    rows.push_back(to_json(row));
  }
  return rows;
}

Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd matrix_from(const json& j) {
  if (!j.is_array()) throw DataError("expected a matrix");
  if (j.empty()) return {};
  const auto cols = j[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = j[r].get<std::vector<double>>();
    if (row.size() != cols) throw DataError("ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

json present_json(const std::vector<bool>& present) {
  std::vector<int> out(present.begin(), present.end());
  return out;
}

std::vector<bool> present_from(const json& j) {
  const auto v = j.get<std::vector<int>>();
  return {v.begin(), v.end()};
}

std::string log_magnify(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "magnify: zeta=" << cfg.magnify.zeta << " gamma=" << cfg.magnify.gamma
      << " levels=" << cfg.magnify.levels << " band=(" << cfg.magnify.band_lo << ','
      << cfg.magnify.band_hi << ") rate=" << cfg.rate;
  return out.str();
}

struct SequenceJob {
  std::string name;
  std::function<std::vector<TriMesh>()> load;
};

Dataset build_dataset(std::vector<SequenceJob> jobs, const std::vector<LabelRow>& rows,
                      const PipelineConfig& cfg, const BuildOptions& options) {
  validate_config(cfg);
  if (options.log && options.magnified) *options.log << log_magnify(cfg) << '\n';

  const bool persist = !options.persist_dir.empty();
  const fs::path fan_dir = options.persist_dir / "fans";
  const fs::path wv_dir = options.persist_dir / "dsf" / "WV";
  const fs::path mwv_dir = options.persist_dir / "dsf" / "MWV";
  if (persist) {
    if (options.persist_fans) fs::create_directories(fan_dir);
    if (options.unmagnified) fs::create_directories(wv_dir);
    if (options.magnified) fs::create_directories(mwv_dir);
  }

  const std::size_t n = jobs.size();
  Dataset data;
  data.names.resize(n);
  if (options.unmagnified) data.wv.resize(n);
  if (options.magnified) data.mwv.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.names[i] = jobs[i].name;
    data.labels.push_back(static_cast<int>(rows[i].label));
    data.subjects.push_back(rows[i].subject);
  }

  std::atomic<std::size_t> done{0};
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const auto& name = jobs[i].name;
    with_context("sequence " + name, [&] {
      const auto frames = with_context("load", jobs[i].load);
      const auto fans = with_context("extract", [&] { return extract_sequence(frames, cfg); });
      if (persist && options.persist_fans) save_fans(fan_dir / (name + ".fan"), fans);
      const auto dsf = with_context("dsf", [&] { return dsf_sequence(fans, cfg.rate); });
      if (options.unmagnified) {
        data.wv[i] = sequence_features(dsf, cfg.pool);
        if (persist) save_dsf(wv_dir / (name + ".dsf"), dsf);
      }
      if (options.magnified) {
        auto mag = with_context("magnify", [&] { return magnify_sequence(dsf, cfg.magnify); });
        data.mwv[i] = sequence_features(mag.sequence, cfg.pool);
        data.mwv[i].clamped = mag.clamped;
        if (persist) save_dsf(mwv_dir / (name + ".dsf"), mag.sequence);
      }
    });
    ++done;
  });
  if (options.log) *options.log << "processed " << done.load() << " sequences\n";

  if (persist) {
    std::vector<LabelRow> out(rows);
    for (std::size_t i = 0; i < n; ++i) out[i].path = data.names[i] + ".dsf";
    if (options.unmagnified) write_labels(wv_dir, out);
    if (options.magnified) write_labels(mwv_dir, out);
  }
  return data;
}

}  // namespace

std::vector<CurveFan> extract_sequence(std::span<const TriMesh> frames, const PipelineConfig& cfg) {
  if (frames.empty()) throw DataError("sequence has no frames");
  const Vec3 nose = cfg.nose ? *cfg.nose : find_nose_tip(frames[0]);
  std::vector<CurveFan> fans(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    fans[i] = with_context("frame " + std::to_string(i), [&] {
      TriMesh aligned;
      if (i == 0) {
        aligned = frames[0];
      } else {
        auto r = rigid_align(frames[i], frames[0], cfg.icp);
        if (!r.converged && r.iterations < cfg.icp.max_iterations) {
          throw NumericalError("rigid alignment found too few correspondences");
        }
        aligned = std::move(r.aligned);
      }
      const TriMesh face = crop_face(aligned, nose, cfg.crop_radius);
      return extract_radial_curves(face, nose, cfg.curves, cfg.samples);
    });
  }
  return fans;
}

std::vector<FrameStats> frame_stats(const DsfSequence& seq) {
  std::vector<FrameStats> out;
  out.reserve(seq.num_frames());
  for (const auto& f : seq.frames) {
    const auto v = f.grid.values();
    FrameStats s;
    if (!v.empty()) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      s.min = *lo;
      s.max = *hi;
      double sum = 0.0;
      for (double x : v) sum += x;
      s.mean = sum / static_cast<double>(v.size());
    }
    out.push_back(s);
  }
  return out;
}

SequenceFeatures sequence_features(const DsfSequence& seq, const PoolGrid& pool) {
  SequenceFeatures f;
  f.mean = mean_deformation(seq);
  f.frames = frame_features(seq, pool);
  // The reference frame is zero by construction and says nothing about
  // the sequence.
  if (f.frames.size() > 1) f.frames.erase(f.frames.begin());
  f.trajectory = frame_stats(seq);
  return f;
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) throw DataError("feature dimension does not match the model");
  return (x - mean).cwiseQuotient(scale);
}

ObservationSequence Standardizer::apply(const ObservationSequence& seq) const {
  ObservationSequence out;
  out.reserve(seq.size());
  for (const auto& x : seq) out.push_back(apply(x));
  return out;
}

Standardizer fit_standardizer(std::span<const ObservationSequence* const> sequences) {
  Standardizer s;
  std::size_t count = 0;
  for (const auto* seq : sequences) {
    for (const auto& x : *seq) {
      if (count == 0) {
        s.mean = Eigen::VectorXd::Zero(x.size());
        s.scale = Eigen::VectorXd::Zero(x.size());
      }
      if (x.size() != s.mean.size()) throw DataError("frame features disagree on dimension");
      s.mean += x;
      ++count;
    }
  }
  if (count == 0) throw DataError("no frames to standardize");
  s.mean /= static_cast<double>(count);
  for (const auto* seq : sequences) {
    for (const auto& x : *seq) s.scale += (x - s.mean).cwiseAbs2();
  }
  s.scale = (s.scale / static_cast<double>(count)).cwiseSqrt();
  for (Eigen::Index k = 0; k < s.scale.size(); ++k) {
    if (!(s.scale[k] > 1e-12)) s.scale[k] = 1.0;
  }
  return s;
}

TrainedModel train_model(std::span<const SequenceFeatures* const> data, std::span<const int> labels,
                         const PipelineConfig& cfg) {
  if (data.size() != labels.size()) throw DataError("feature and label counts differ");
  TrainedModel model;
  model.kind = cfg.classifier;
  model.pool = cfg.pool;
  if (cfg.classifier == ClassifierKind::Svm) {
    std::vector<Eigen::VectorXd> x;
    x.reserve(data.size());
    for (const auto* d : data) x.push_back(d->mean);
    model.svm = train_svm(x, labels, kClasses, cfg.svm_options());
  } else {
    std::vector<const ObservationSequence*> raw;
    raw.reserve(data.size());
    for (const auto* d : data) raw.push_back(&d->frames);
    model.standardizer = fit_standardizer(raw);
    std::vector<ObservationSequence> seqs;
    seqs.reserve(data.size());
    for (const auto* d : data) seqs.push_back(model.standardizer.apply(d->frames));
    model.hmm = train_hmm(seqs, labels, kClasses, cfg.hmm_options());
  }
  return model;
}

Prediction predict(const TrainedModel& model, const SequenceFeatures& x) {
  if (model.kind == ClassifierKind::Svm) return classify(model.svm, x.mean);
  return classify(model.hmm, model.standardizer.apply(x.frames));
}

std::string model_to_json(const TrainedModel& model) {
  json j;
  j["format"] = "defmag-model-1";
  j["classifier"] = std::string(to_string(model.kind));
  j["pool"] = {model.pool.angle_blocks, model.pool.radius_blocks};
  if (model.kind == ClassifierKind::Svm) {
    const auto& s = model.svm;
    j["mean"] = to_json(s.mean);
    j["scale"] = to_json(s.scale);
    j["weights"] = to_json(s.weights);
    j["bias"] = to_json(s.bias);
    j["present"] = present_json(s.present);
  } else {
    j["standardizer"] = {{"mean", to_json(model.standardizer.mean)},
                         {"scale", to_json(model.standardizer.scale)}};
    j["present"] = present_json(model.hmm.present);
    json models = json::array();
    for (const auto& m : model.hmm.models) {
      models.push_back({{"initial", to_json(m.initial)},
                        {"transition", to_json(m.transition)},
                        {"means", to_json(m.means)},
                        {"variances", to_json(m.variances)}});
    }
    j["models"] = std::move(models);
  }
  return j.dump(1);
}

TrainedModel model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "defmag-model-1") throw DataError("unknown model format");
    TrainedModel model;
    model.kind = parse_classifier(j.at("classifier").get<std::string>());
    model.pool.angle_blocks = j.at("pool").at(0).get<std::size_t>();
    model.pool.radius_blocks = j.at("pool").at(1).get<std::size_t>();
    if (model.kind == ClassifierKind::Svm) {
      auto& s = model.svm;
      s.mean = vector_from(j.at("mean"));
      s.scale = vector_from(j.at("scale"));
      s.weights = matrix_from(j.at("weights"));
      s.bias = vector_from(j.at("bias"));
      s.present = present_from(j.at("present"));
    } else {
      model.standardizer.mean = vector_from(j.at("standardizer").at("mean"));
      model.standardizer.scale = vector_from(j.at("standardizer").at("scale"));
      model.hmm.present = present_from(j.at("present"));
      for (const auto& m : j.at("models")) {
        GaussianHmm h;
        h.initial = vector_from(m.at("initial"));
        h.transition = matrix_from(m.at("transition"));
        h.means = matrix_from(m.at("means"));
        h.variances = matrix_from(m.at("variances"));
        model.hmm.models.push_back(std::move(h));
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid model file: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("invalid model file: ") + e.what());
  }
}

void save_model(const fs::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << model_to_json(model) << '\n';
}

TrainedModel load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

CvResult evaluate(const std::vector<SequenceFeatures>& data, std::span<const int> labels,
                  std::span<const std::string> subjects, const PipelineConfig& cfg,
                  std::optional<ClassifierKind> kind) {
  PipelineConfig local = cfg;
  if (kind) local.classifier = *kind;
  auto runner = [&](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test) {
    std::vector<const SequenceFeatures*> x;
    std::vector<int> y;
    for (auto i : train) {
      x.push_back(&data[i]);
      y.push_back(labels[i]);
    }
    const auto model = train_model(x, y, local);
    std::vector<int> out;
    for (auto i : test) out.push_back(predict(model, data[i]).label);
    return out;
  };
  return cross_validate(labels, subjects, kClasses, local.folds, local.seed, runner);
}

Dataset build_dataset_from_meshes(const fs::path& dir, const PipelineConfig& cfg,
                                  const BuildOptions& options) {
  const auto rows = read_labels(dir);
  std::vector<SequenceJob> jobs;
  for (const auto& r : rows) {
    const fs::path seq_dir = dir / r.path;
    jobs.push_back({fs::path(r.path).filename().string(), [seq_dir] { return load_mesh_sequence(seq_dir); }});
  }
  return build_dataset(std::move(jobs), rows, cfg, options);
}

Dataset build_dataset_from_synth(const PipelineConfig& cfg, const BuildOptions& options) {
  cfg.synth.validate();
  std::vector<SequenceJob> jobs;
  std::vector<LabelRow> rows;
  for (const auto& info : synth_plan(cfg.synth)) {
    jobs.push_back({info.name, [&cfg, info] { return synth_sequence(cfg.synth, cfg.seed, info); }});
    rows.push_back({info.name, info.label, info.subject});
  }
  return build_dataset(std::move(jobs), rows, cfg, options);
}

Dataset load_dsf_dataset(const fs::path& dir, const PoolGrid& pool) {
  const auto rows = read_labels(dir);
  Dataset data;
  for (const auto& r : rows) {
    const auto seq = with_context(r.path, [&] { return load_dsf(dir / r.path); });
    data.names.push_back(fs::path(r.path).stem().string());
    data.labels.push_back(static_cast<int>(r.label));
    data.subjects.push_back(r.subject);
    data.wv.push_back(with_context(r.path, [&] { return sequence_features(seq, pool); }));
  }
  return data;
}

RunReport run_pipeline(const PipelineConfig& cfg, const RunOptions& options) {
  validate_config(cfg);
  BuildOptions build;
  build.unmagnified = options.compare || !options.magnify;
  build.magnified = options.magnify;
  build.persist_fans = options.persist_fans;
  build.log = options.log;
  if (options.persist) build.persist_dir = options.output;

  RunReport report;
  report.dataset = options.input ? build_dataset_from_meshes(*options.input, cfg, build)
                                 : build_dataset_from_synth(cfg, build);
  const auto& d = report.dataset;

  auto run_condition = [&](const std::string& name, bool magnified) {
    const auto& data = magnified ? d.mwv : d.wv;
    ConditionResult r;
    r.name = name;
    r.magnified = magnified;
    r.cv = with_context("classify " + name, [&] { return evaluate(data, d.labels, d.subjects, cfg); });
    if (options.log) {
      *options.log << name << ' ' << to_string(cfg.classifier) << " accuracy "
                   << format_fixed(r.cv.mean_accuracy) << " +- " << format_fixed(r.cv.std_accuracy) << '\n';
    }
    if (options.persist) {
      std::vector<const SequenceFeatures*> x;
      for (const auto& f : data) x.push_back(&f);
      fs::create_directories(options.output / "models");
      save_model(options.output / "models" / (name + ".json"), train_model(x, d.labels, cfg));
    }
    report.conditions.push_back(std::move(r));
  };
  if (build.unmagnified) run_condition("WV", false);
  if (build.magnified) run_condition("MWV", true);

  export_report(options.output, report);
  return report;
}

}  // namespace defmag
