#include "defmag/classifier.hpp"

#include <cmath>

namespace defmag {

int argmax_label(const Eigen::VectorXd& scores) {
  int best = -1;
  for (int i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) continue;
    if (best < 0 || scores[i] > scores[best]) best = i;
  }
  return best < 0 ? 0 : best;
}

}  // namespace defmag
