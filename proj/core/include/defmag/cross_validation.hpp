#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace defmag {

/// Fold index per sample. Subjects never span folds; subjects are shuffled
/// with `seed` and each goes to the fold currently holding the fewest
/// samples (lowest index on ties). Throws DataError if k < 2 or some fold
/// ends up without a sample of a class present in the data.
std::vector<int> assign_folds(std::span<const int> labels,
                              std::span<const std::string> subjects, int k,
                              std::uint64_t seed);

/// Trains on `train` and returns one predicted label per entry of `test`.
using FoldRunner = std::function<std::vector<int>(const std::vector<std::size_t>& train,
                                                  const std::vector<std::size_t>& test)>;

struct CvResult {
  Eigen::MatrixXd counts;   ///< true class x predicted class
  Eigen::MatrixXd percent;  ///< rows normalized to 100 (zero rows stay 0)
  std::vector<double> fold_accuracy;  ///< percent
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;          ///< sample standard deviation
  std::vector<int> folds;
  std::vector<int> predictions;
};

CvResult cross_validate(std::span<const int> labels, std::span<const std::string> subjects,
                        int num_classes, int k, std::uint64_t seed, const FoldRunner& runner);

}  // namespace defmag
