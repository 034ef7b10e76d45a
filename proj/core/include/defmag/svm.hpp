#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "defmag/classifier.hpp"

namespace defmag {

struct SvmOptions {
  double c = 1.0;
  int epochs = 60;
  std::uint64_t seed = 42;
};

/// One-vs-rest linear SVMs over standardized features.
struct SvmModel {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;    ///< per-dimension standard deviation (1 where 0)
  Eigen::MatrixXd weights;  ///< classes x dim
  Eigen::VectorXd bias;
  std::vector<bool> present;  ///< classes seen during training

  bool trained() const { return weights.size() > 0; }
  int num_classes() const { return static_cast<int>(weights.rows()); }
  int dim() const { return static_cast<int>(weights.cols()); }
};

/// Pegasos-style stochastic subgradient descent on
/// 1/2 |w|^2 + C * sum hinge, with a seeded sample order. Labels are in
/// [0, num_classes). Throws UsageError with fewer than two classes or
/// fewer than two samples.
SvmModel train_svm(std::span<const Eigen::VectorXd> features, std::span<const int> labels,
                   int num_classes, const SvmOptions& options = {});

/// Decision values of every class; classes absent from training score -inf.
Eigen::VectorXd svm_decision_values(const SvmModel& model, const Eigen::VectorXd& x);
Prediction classify(const SvmModel& model, const Eigen::VectorXd& x);

}  // namespace defmag
