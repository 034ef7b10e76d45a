#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "defmag/classifier.hpp"

namespace defmag {

using ObservationSequence = std::vector<Eigen::VectorXd>;

enum class HmmTopology { LeftToRight, Ergodic };

struct HmmOptions {
  int states = 3;
  HmmTopology topology = HmmTopology::LeftToRight;
  int max_iterations = 100;
  double tolerance = 1e-6;  ///< stop when the log-likelihood gain is smaller
  double variance_floor = 1e-6;
};

/// HMM with diagonal-covariance Gaussian emissions.
struct GaussianHmm {
  Eigen::VectorXd initial;      ///< K
  Eigen::MatrixXd transition;   ///< K x K, row-stochastic
  Eigen::MatrixXd means;        ///< K x d
  Eigen::MatrixXd variances;    ///< K x d

  int states() const { return static_cast<int>(initial.size()); }
  int dim() const { return static_cast<int>(means.cols()); }
};

struct HmmTrainResult {
  GaussianHmm model;
  /// Total training log-likelihood before the first update and after
  /// every EM iteration.
  std::vector<double> log_likelihood;
  int iterations = 0;
};

/// Forward algorithm in log space. `log_emission` is T x K with entry
/// (t, k) = log p(o_t | state k). Throws DataError on T = 0 or shape
/// mismatch.
double forward_log_likelihood(const Eigen::VectorXd& log_initial,
                              const Eigen::MatrixXd& log_transition,
                              const Eigen::MatrixXd& log_emission);

/// T x K log-densities of the diagonal Gaussians.
Eigen::MatrixXd emission_log_densities(const GaussianHmm& model, const ObservationSequence& seq);

double hmm_log_likelihood(const GaussianHmm& model, const ObservationSequence& seq);

/// Baum-Welch on the sequences of one class. Every sequence needs at
/// least `states` frames. Initial parameters come from a uniform split of
/// each sequence (left-to-right) or from quantiles of the first feature
/// (ergodic), so training is deterministic.
HmmTrainResult train_gaussian_hmm(std::span<const ObservationSequence> sequences,
                                  const HmmOptions& options = {});

/// One HMM per class; a class without training sequences has no model.
struct HmmClassifier {
  std::vector<GaussianHmm> models;
  std::vector<bool> present;

  bool trained() const { return !models.empty(); }
  int num_classes() const { return static_cast<int>(models.size()); }
};

HmmClassifier train_hmm(std::span<const ObservationSequence> sequences,
                        std::span<const int> labels, int num_classes,
                        const HmmOptions& options = {});

/// Per-class log-likelihoods; classes without a model score -inf.
Eigen::VectorXd hmm_scores(const HmmClassifier& clf, const ObservationSequence& seq);
Prediction classify(const HmmClassifier& clf, const ObservationSequence& seq);

}  // namespace defmag
