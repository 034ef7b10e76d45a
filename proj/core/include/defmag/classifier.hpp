#pragma once

#include <Eigen/Core>

namespace defmag {

struct Prediction {
  int label = 0;
  Eigen::VectorXd scores;  ///< one entry per class
};

/// Index of the largest score; the lowest index wins ties. Non-finite
/// scores (absent classes) never win over finite ones.
int argmax_label(const Eigen::VectorXd& scores);

}  // namespace defmag
