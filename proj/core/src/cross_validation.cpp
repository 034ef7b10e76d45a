#include "defmag/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "defmag/error.hpp"
#include "defmag/random.hpp"

namespace defmag {

std::vector<int> assign_folds(std::span<const int> labels, std::span<const std::string> subjects,
                              int k, std::uint64_t seed) {
  if (k < 2) throw DataError("cross-validation needs at least 2 folds");
  if (labels.size() != subjects.size()) throw DataError("labels and subjects differ in count");

  // Subjects in first-appearance order, then shuffled.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    auto [it, inserted] = members.try_emplace(subjects[i]);
    if (inserted) order.push_back(subjects[i]);
    it->second.push_back(i);
  }
  if (order.size() < static_cast<std::size_t>(k)) {
    throw DataError("insufficient samples for stratification: " + std::to_string(order.size()) +
                    " subjects cannot fill " + std::to_string(k) + " folds");
  }
  Rng rng(seed);
  rng.shuffle(std::span(order));

  std::vector<int> folds(labels.size(), -1);
  std::vector<std::size_t> load(static_cast<std::size_t>(k), 0);
  for (const auto& s : order) {
    const auto f = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    for (auto i : members[s]) folds[i] = static_cast<int>(f);
    load[f] += members[s].size();
  }

  const std::set<int> classes(labels.begin(), labels.end());
  for (int f = 0; f < k; ++f) {
    std::set<int> seen;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (folds[i] == f) seen.insert(labels[i]);
    }
    if (seen != classes) {
      throw DataError("insufficient samples for stratification: fold " + std::to_string(f) +
                      " lacks a sample of some class");
    }
  }
  return folds;
}

CvResult cross_validate(std::span<const int> labels, std::span<const std::string> subjects,
                        int num_classes, int k, std::uint64_t seed, const FoldRunner& runner) {
  CvResult r;
  r.folds = assign_folds(labels, subjects, k, seed);
  r.predictions.assign(labels.size(), -1);
  r.counts = Eigen::MatrixXd::Zero(num_classes, num_classes);

  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < labels.size(); ++i) (r.folds[i] == f ? test : train).push_back(i);
    const auto predicted = runner(train, test);
    if (predicted.size() != test.size()) throw DataError("fold runner returned the wrong number of predictions");
    std::size_t correct = 0;
    for (std::size_t j = 0; j < test.size(); ++j) {
      const int truth = labels[test[j]];
      const int guess = predicted[j];
      if (guess < 0 || guess >= num_classes) throw DataError("prediction out of range");
      r.predictions[test[j]] = guess;
      r.counts(truth, guess) += 1.0;
      if (truth == guess) ++correct;
    }
    r.fold_accuracy.push_back(100.0 * static_cast<double>(correct) / static_cast<double>(test.size()));
  }

  r.percent = r.counts;
  for (int c = 0; c < num_classes; ++c) {
    const double row = r.counts.row(c).sum();
    if (row > 0.0) r.percent.row(c) *= 100.0 / row;
  }
  const double n = static_cast<double>(r.fold_accuracy.size());
  r.mean_accuracy = std::accumulate(r.fold_accuracy.begin(), r.fold_accuracy.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : r.fold_accuracy) ss += (a - r.mean_accuracy) * (a - r.mean_accuracy);
  r.std_accuracy = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return r;
}

}  // namespace defmag
