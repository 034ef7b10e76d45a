#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "defmag/config.hpp"
#include "defmag/cross_validation.hpp"
#include "defmag/dataset.hpp"
#include "defmag/dsf.hpp"
#include "defmag/hmm.hpp"
#include "defmag/radial_curves.hpp"
#include "defmag/svm.hpp"

namespace defmag {

/// Nose tip on the first frame (or cfg.nose), every frame rigidly aligned
/// to the first, cropped around the tip and cut into radial curves.
/// Errors are rethrown with the frame index prepended.
std::vector<CurveFan> extract_sequence(std::span<const TriMesh> frames, const PipelineConfig& cfg);

struct FrameStats {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

std::vector<FrameStats> frame_stats(const DsfSequence& seq);

/// Everything the classifiers and reports need from one DSF sequence.
struct SequenceFeatures {
  Eigen::VectorXd mean;          ///< time-averaged field
  ObservationSequence frames;    ///< pooled features of frames 1..n-1
  std::vector<FrameStats> trajectory;
  std::size_t clamped = 0;       ///< entries clamped by magnification
};

SequenceFeatures sequence_features(const DsfSequence& seq, const PoolGrid& pool);

/// Per-dimension affine map to zero mean and unit variance; dimensions
/// without spread keep scale 1.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  ObservationSequence apply(const ObservationSequence& seq) const;
};

Standardizer fit_standardizer(std::span<const ObservationSequence* const> sequences);

/// Classifier trained on a set of sequences; HMMs see standardized frames.
struct TrainedModel {
  ClassifierKind kind = ClassifierKind::Hmm;
  PoolGrid pool;
  SvmModel svm;
  HmmClassifier hmm;
  Standardizer standardizer;
};

TrainedModel train_model(std::span<const SequenceFeatures* const> data, std::span<const int> labels,
                         const PipelineConfig& cfg);
Prediction predict(const TrainedModel& model, const SequenceFeatures& x);

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

/// Subject-grouped k-fold evaluation of `cfg.classifier` (or `kind`).
CvResult evaluate(const std::vector<SequenceFeatures>& data, std::span<const int> labels,
                  std::span<const std::string> subjects, const PipelineConfig& cfg,
                  std::optional<ClassifierKind> kind = std::nullopt);

/// Labelled sequences with features for the unmagnified (WV) and magnified
/// (MWV) conditions. A condition that was not computed is empty.
struct Dataset {
  std::vector<std::string> names;
  std::vector<int> labels;
  std::vector<std::string> subjects;
  std::vector<SequenceFeatures> wv;
  std::vector<SequenceFeatures> mwv;
  std::size_t size() const { return names.size(); }
};

struct BuildOptions {
  bool unmagnified = true;
  bool magnified = true;
  /// Where to persist intermediates; empty disables persistence.
  std::filesystem::path persist_dir;
  bool persist_fans = false;
  std::ostream* log = nullptr;
};

/// Sequences listed in `<dir>/labels.csv`, each a directory of OBJ frames.
Dataset build_dataset_from_meshes(const std::filesystem::path& dir, const PipelineConfig& cfg,
                                  const BuildOptions& options);
/// Sequences drawn from the synthetic generator (cfg.synth, cfg.seed),
/// processed in memory.
Dataset build_dataset_from_synth(const PipelineConfig& cfg, const BuildOptions& options);
/// `<dir>/labels.csv` listing .dsf files; features go to `wv`.
Dataset load_dsf_dataset(const std::filesystem::path& dir, const PoolGrid& pool);

struct ConditionResult {
  std::string name;  ///< "WV" or "MWV"
  bool magnified = false;
  CvResult cv;
};

struct RunOptions {
  std::optional<std::filesystem::path> input;  ///< OBJ dataset; synth otherwise
  bool compare = false;
  bool magnify = true;
  bool persist = true;
  bool persist_fans = false;
  std::filesystem::path output = "out";
  std::ostream* log = nullptr;
};

struct RunReport {
  Dataset dataset;
  std::vector<ConditionResult> conditions;
};

/// extract -> dsf -> magnify -> cross-validate, writing reports (and,
/// with `persist`, DSFs and models) under `options.output`.
RunReport run_pipeline(const PipelineConfig& cfg, const RunOptions& options);

}  // namespace defmag
