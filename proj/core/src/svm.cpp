#include "defmag/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "defmag/error.hpp"
#include "defmag/random.hpp"

namespace defmag {

SvmModel train_svm(std::span<const Eigen::VectorXd> features, std::span<const int> labels,
                   int num_classes, const SvmOptions& options) {
  if (features.size() != labels.size()) throw UsageError("features and labels differ in count");
  if (features.size() < 2) throw UsageError("SVM training needs at least two samples");
  if (!(options.c > 0.0) || options.epochs < 1) throw UsageError("SVM needs C > 0 and epochs >= 1");

  const auto n = features.size();
  const auto dim = features.front().size();
  SvmModel model;
  model.present.assign(static_cast<std::size_t>(num_classes), false);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw UsageError("label out of range: " + std::to_string(y));
    model.present[static_cast<std::size_t>(y)] = true;
  }
  if (std::count(model.present.begin(), model.present.end(), true) < 2) {
    throw UsageError("SVM training needs at least two classes");
  }

  model.mean = Eigen::VectorXd::Zero(dim);
  for (const auto& x : features) {
    if (x.size() != dim) throw DataError("feature vectors differ in dimension");
    model.mean += x;
  }
  model.mean /= static_cast<double>(n);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
  for (const auto& x : features) var += (x - model.mean).cwiseAbs2();
  var /= static_cast<double>(n);
  model.scale = var.cwiseSqrt().unaryExpr([](double s) { return s > 1e-12 ? s : 1.0; });

  // Standardized samples with a constant 1 appended for the bias.
  Eigen::MatrixXd z(dim + 1, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    z.col(col).head(dim) = (features[i] - model.mean).cwiseQuotient(model.scale);
    z(dim, col) = 1.0;
  }
  const Eigen::VectorXd sq_norms = z.colwise().squaredNorm().transpose();

  const double lambda = 1.0 / (options.c * static_cast<double>(n));
  const double radius2 = 1.0 / lambda;
  model.weights = Eigen::MatrixXd::Zero(num_classes, dim);
  model.bias = Eigen::VectorXd::Zero(num_classes);

  std::vector<std::size_t> order(n);
  const int average_from = options.epochs / 2;
  for (int c = 0; c < num_classes; ++c) {
    if (!model.present[static_cast<std::size_t>(c)]) continue;
    Rng rng(options.seed + static_cast<std::uint64_t>(c));
    // w = scale * v, tracked lazily so the shrink step is O(1).
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim + 1);
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(dim + 1);
    double scale = 1.0, v_norm2 = 0.0;
    int averaged = 0;
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(std::span(order));
      for (auto i : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const auto col = static_cast<Eigen::Index>(i);
        const double y = labels[i] == c ? 1.0 : -1.0;
        double vx = v.dot(z.col(col));
        const double margin = y * scale * vx;
        scale *= 1.0 - eta * lambda;
        if (scale < 1e-9) {
          // Fold the scale into v; exactly zero on the first step.
          v *= scale;
          v_norm2 *= scale * scale;
          vx *= scale;
          scale = 1.0;
        }
        if (margin < 1.0) {
          const double a = eta * y / scale;
          v_norm2 += 2.0 * a * vx + a * a * sq_norms[col];
          v.noalias() += a * z.col(col);
        }
        const double w_norm2 = scale * scale * v_norm2;
        if (w_norm2 > radius2) {
          scale *= std::sqrt(radius2 / w_norm2);
        }
      }
      if (epoch >= average_from) {
        avg += scale * v;
        ++averaged;
      }
    }
    avg /= static_cast<double>(averaged);
    model.weights.row(c) = avg.head(dim).transpose();
    model.bias[c] = avg[dim];
  }
  return model;
}

Eigen::VectorXd svm_decision_values(const SvmModel& model, const Eigen::VectorXd& x) {
  if (!model.trained()) throw UsageError("SVM model is not trained");
  if (x.size() != model.dim()) throw DataError("feature dimension does not match the SVM model");
  const Eigen::VectorXd z = (x - model.mean).cwiseQuotient(model.scale);
  Eigen::VectorXd scores = model.weights * z + model.bias;
  for (int c = 0; c < model.num_classes(); ++c) {
    if (!model.present[static_cast<std::size_t>(c)]) {
      scores[c] = -std::numeric_limits<double>::infinity();
    }
  }
  return scores;
}

Prediction classify(const SvmModel& model, const Eigen::VectorXd& x) {
  Prediction p;
  p.scores = svm_decision_values(model, x);
  p.label = argmax_label(p.scores);
  return p;
}

}  // namespace defmag
