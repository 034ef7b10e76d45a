#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "defmag/cross_validation.hpp"
#include "defmag/error.hpp"
#include "defmag/random.hpp"

using namespace defmag;

namespace {

struct Data {
  std::vector<int> labels;
  std::vector<std::string> subjects;
};

Data make_data(int subjects, int classes, int reps) {
  Data d;
  for (int s = 0; s < subjects; ++s) {
    for (int c = 0; c < classes; ++c) {
      for (int r = 0; r < reps; ++r) {
        d.labels.push_back(c);
        d.subjects.push_back("S" + std::to_string(s));
      }
    }
  }
  return d;
}

}  // namespace

TEST_CASE("perfect runner gives the identity matrix") {
  const auto d = make_data(10, 6, 2);
  const auto r = cross_validate(d.labels, d.subjects, 6, 10, 1,
                                [&](const auto&, const std::vector<std::size_t>& test) {
                                  std::vector<int> out;
                                  for (auto i : test) out.push_back(d.labels[i]);
                                  return out;
                                });
  CHECK(r.mean_accuracy == 100.0);
  CHECK(r.std_accuracy == 0.0);
  CHECK((r.percent - 100.0 * Eigen::MatrixXd::Identity(6, 6)).norm() == 0.0);
  CHECK(r.counts.sum() == 120.0);
}

TEST_CASE("random runner sits near chance") {
  const auto d = make_data(10, 6, 20);
  Rng rng(9);
  const auto r = cross_validate(d.labels, d.subjects, 6, 10, 2,
                                [&](const auto&, const std::vector<std::size_t>& test) {
                                  std::vector<int> out;
                                  for (std::size_t i = 0; i < test.size(); ++i) out.push_back(static_cast<int>(rng.index(6)));
                                  return out;
                                });
  // 1200 Bernoulli(1/6) trials.
  const double sigma = 100.0 * std::sqrt((1.0 / 6.0) * (5.0 / 6.0) / 1200.0);
  CHECK(std::abs(r.mean_accuracy - 100.0 / 6.0) < 3.0 * sigma);
  for (int c = 0; c < 6; ++c) CHECK(r.percent.row(c).sum() == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("folds never split a subject and cover every class") {
  const auto d = make_data(13, 6, 2);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto folds = assign_folds(d.labels, d.subjects, 5, seed);
    std::map<std::string, std::set<int>> per_subject;
    for (std::size_t i = 0; i < folds.size(); ++i) per_subject[d.subjects[i]].insert(folds[i]);
    for (const auto& [s, f] : per_subject) CHECK(f.size() == 1);
    for (int f = 0; f < 5; ++f) {
      std::set<int> classes;
      for (std::size_t i = 0; i < folds.size(); ++i) {
        if (folds[i] == f) classes.insert(d.labels[i]);
      }
      CHECK(classes.size() == 6);
    }
  }
}

TEST_CASE("assignment is deterministic in the seed") {
  const auto d = make_data(20, 6, 1);
  CHECK(assign_folds(d.labels, d.subjects, 10, 7) == assign_folds(d.labels, d.subjects, 10, 7));
  CHECK(assign_folds(d.labels, d.subjects, 4, 7) != assign_folds(d.labels, d.subjects, 4, 8));
}

TEST_CASE("train and test partitions are disjoint") {
  const auto d = make_data(10, 6, 2);
  cross_validate(d.labels, d.subjects, 6, 10, 3,
                 [&](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test) {
                   std::set<std::string> train_subjects;
                   for (auto i : train) train_subjects.insert(d.subjects[i]);
                   for (auto i : test) CHECK(train_subjects.count(d.subjects[i]) == 0);
                   CHECK(train.size() + test.size() == d.labels.size());
                   return std::vector<int>(test.size(), 0);
                 });
}

TEST_CASE("insufficient data for stratification") {
  const auto few = make_data(3, 6, 2);
  CHECK_THROWS_AS(assign_folds(few.labels, few.subjects, 10, 1), DataError);
  auto lacking = make_data(4, 6, 1);
  lacking.labels[0] = 1;  // subject S0 has no class 0 sample
  CHECK_THROWS_AS(assign_folds(lacking.labels, lacking.subjects, 4, 1), DataError);
  CHECK_THROWS_AS(assign_folds(few.labels, few.subjects, 1, 1), DataError);
}
