#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "defmag/error.hpp"
#include "defmag/hmm.hpp"
#include "defmag/random.hpp"

using namespace defmag;

namespace {

// Sum over every state path, no recursion shared with the forward pass.
double brute_force_log_likelihood(const Eigen::VectorXd& pi, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int k = static_cast<int>(pi.size());
  const int tn = static_cast<int>(b.rows());
  int paths = 1;
  for (int t = 0; t < tn; ++t) paths *= k;
  double total = 0.0;
  for (int code = 0; code < paths; ++code) {
    int c = code;
    int prev = -1;
    double p = 1.0;
    for (int t = 0; t < tn; ++t) {
      const int s = c % k;
      c /= k;
      p *= (prev < 0 ? pi[s] : a(prev, s)) * b(t, s);
      prev = s;
    }
    total += p;
  }
  return std::log(total);
}

Eigen::VectorXd random_simplex(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (auto& e : v) e = rng.uniform(0.05, 1.0);
  return v / v.sum();
}

// Samples a sequence from a left-to-right 2-state chain with Gaussian emissions.
ObservationSequence sample_two_state(Rng& rng, std::size_t length, double stay, const Eigen::Vector2d& mu0,
                                     const Eigen::Vector2d& mu1, double sigma) {
  ObservationSequence seq;
  int s = 0;
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0 && s == 0 && rng.uniform() > stay) s = 1;
    Eigen::VectorXd o = s == 0 ? mu0 : mu1;
    for (auto& e : o) e += sigma * rng.normal();
    seq.push_back(o);
  }
  return seq;
}

}  // namespace

TEST_CASE("forward pass matches path enumeration") {
  Rng rng(1);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 1 + static_cast<int>(rng.index(3));
    const int tn = 1 + static_cast<int>(rng.index(6));
    const Eigen::VectorXd pi = random_simplex(rng, k);
    Eigen::MatrixXd a(k, k), b(tn, k);
    for (int i = 0; i < k; ++i) a.row(i) = random_simplex(rng, k).transpose();
    for (auto& e : b.reshaped()) e = rng.uniform(0.01, 2.0);
    const double expected = brute_force_log_likelihood(pi, a, b);
    const double got = forward_log_likelihood(pi.array().log(), a.array().log(), b.array().log());
    CHECK(std::abs(got - expected) <= 1e-10 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("two-state discrete toy") {
  Eigen::Vector2d pi(0.6, 0.4);
  Eigen::Matrix2d a;
  a << 0.7, 0.3, 0.4, 0.6;
  Eigen::Matrix<double, 2, 3> emit;
  emit << 0.5, 0.4, 0.1, 0.1, 0.3, 0.6;
  const int obs[] = {0, 1, 2, 2};
  Eigen::MatrixXd b(4, 2);
  for (int t = 0; t < 4; ++t) b.row(t) = emit.col(obs[t]).transpose();
  // Hand-computed forward recursion: alpha_4 = (0.00168208, 0.01167552).
  CHECK(forward_log_likelihood(pi.array().log(), a.array().log(), b.array().log()) ==
        doctest::Approx(std::log(0.0133576)).epsilon(1e-12));
}

TEST_CASE("forward pass handles structural zeros and rejects bad shapes") {
  const double ninf = -std::numeric_limits<double>::infinity();
  Eigen::Vector2d log_pi(0.0, ninf);
  Eigen::Matrix2d log_a;
  log_a << std::log(0.5), std::log(0.5), ninf, 0.0;
  Eigen::MatrixXd log_b = Eigen::MatrixXd::Zero(3, 2);
  CHECK(forward_log_likelihood(log_pi, log_a, log_b) == doctest::Approx(0.0));
  CHECK_THROWS_AS(forward_log_likelihood(log_pi, log_a, Eigen::MatrixXd(0, 2)), DataError);
  CHECK_THROWS_AS(forward_log_likelihood(log_pi, log_a, Eigen::MatrixXd::Zero(3, 3)), DataError);
}

TEST_CASE("single state reduces to independent Gaussians") {
  Rng rng(2);
  std::vector<ObservationSequence> seqs(3);
  for (auto& s : seqs) {
    for (int t = 0; t < 8; ++t) s.push_back(Eigen::Vector2d(rng.normal(1.0, 2.0), rng.normal(-1.0, 0.5)));
  }
  HmmOptions opts;
  opts.states = 1;
  const auto r = train_gaussian_hmm(seqs, opts);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero(), var = Eigen::Vector2d::Zero();
  for (const auto& s : seqs) {
    for (const auto& o : s) mean += o;
  }
  mean /= 24.0;
  for (const auto& s : seqs) {
    for (const auto& o : s) var += (o - mean).cwiseAbs2();
  }
  var /= 24.0;
  CHECK((r.model.means.row(0).transpose() - mean).norm() < 1e-10);
  CHECK((r.model.variances.row(0).transpose() - var).norm() < 1e-10);

  double expected = 0.0;
  for (const auto& o : seqs[0]) {
    for (int j = 0; j < 2; ++j) {
      expected += -0.5 * std::log(2.0 * std::numbers::pi * var[j]) - 0.5 * (o[j] - mean[j]) * (o[j] - mean[j]) / var[j];
    }
  }
  CHECK(hmm_log_likelihood(r.model, seqs[0]) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("Baum-Welch") {
  Rng rng(3);
  std::vector<ObservationSequence> seqs;
  for (int i = 0; i < 20; ++i) seqs.push_back(sample_two_state(rng, 30, 0.9, {0, 0}, {4, -3}, 0.5));

  for (auto topology : {HmmTopology::LeftToRight, HmmTopology::Ergodic}) {
    HmmOptions opts;
    opts.states = 2;
    opts.topology = topology;
    const auto r = train_gaussian_hmm(seqs, opts);
    SUBCASE("log-likelihood never decreases") {
      REQUIRE(r.log_likelihood.size() >= 2);
      for (std::size_t i = 1; i < r.log_likelihood.size(); ++i) {
        CHECK(r.log_likelihood[i] >= r.log_likelihood[i - 1] - 1e-8 * std::abs(r.log_likelihood[i - 1]));
      }
    }
    SUBCASE("parameters stay stochastic") {
      CHECK(r.model.initial.sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(r.model.initial.minCoeff() >= 0.0);
      for (int i = 0; i < 2; ++i) CHECK(r.model.transition.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(r.model.transition.minCoeff() >= 0.0);
      CHECK(r.model.variances.minCoeff() >= opts.variance_floor);
    }
    SUBCASE("recovers the generating means") {
      Eigen::MatrixXd m = r.model.means;
      if (m(0, 0) > m(1, 0)) m.row(0).swap(m.row(1));
      CHECK((m.row(0) - Eigen::RowVector2d(0, 0)).norm() < 0.3);
      CHECK((m.row(1) - Eigen::RowVector2d(4, -3)).norm() < 0.3);
    }
  }
}

TEST_CASE("left-to-right training keeps the topology") {
  Rng rng(4);
  std::vector<ObservationSequence> seqs;
  for (int i = 0; i < 10; ++i) seqs.push_back(sample_two_state(rng, 20, 0.85, {0, 0}, {3, 3}, 0.7));
  HmmOptions opts;
  opts.states = 3;
  const auto r = train_gaussian_hmm(seqs, opts);
  CHECK(r.model.initial[0] == doctest::Approx(1.0));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < i; ++j) CHECK(r.model.transition(i, j) == 0.0);
  }
  CHECK(r.model.transition(0, 2) == 0.0);
}

TEST_CASE("classifier picks the generating class") {
  Rng rng(5);
  std::vector<ObservationSequence> seqs;
  std::vector<int> labels;
  for (int i = 0; i < 12; ++i) {
    const bool second = i % 2 == 1;
    seqs.push_back(second ? sample_two_state(rng, 25, 0.8, {0, 0}, {-3, 2}, 0.5)
                          : sample_two_state(rng, 25, 0.8, {0, 0}, {3, 2}, 0.5));
    labels.push_back(second ? 4 : 1);
  }
  HmmOptions opts;
  opts.states = 2;
  const auto clf = train_hmm(seqs, labels, 6, opts);
  CHECK(clf.num_classes() == 6);
  int ok = 0;
  for (int i = 0; i < 10; ++i) {
    const bool second = i % 2 == 1;
    const auto s = second ? sample_two_state(rng, 25, 0.8, {0, 0}, {-3, 2}, 0.5)
                          : sample_two_state(rng, 25, 0.8, {0, 0}, {3, 2}, 0.5);
    const auto p = classify(clf, s);
    ok += p.label == (second ? 4 : 1);
    CHECK(p.scores[0] == -std::numeric_limits<double>::infinity());
  }
  CHECK(ok == 10);
}

TEST_CASE("invalid HMM input") {
  GaussianHmm m;
  m.initial = Eigen::VectorXd::Ones(1);
  m.transition = Eigen::MatrixXd::Ones(1, 1);
  m.means = Eigen::MatrixXd::Zero(1, 2);
  m.variances = Eigen::MatrixXd::Ones(1, 2);
  CHECK_THROWS_AS(hmm_log_likelihood(m, ObservationSequence{}), DataError);
  CHECK_THROWS_AS(hmm_log_likelihood(m, ObservationSequence{Eigen::Vector3d(0, 0, 0)}), DataError);

  std::vector<ObservationSequence> short_seq{{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)}};
  CHECK_THROWS_AS(train_gaussian_hmm(short_seq, HmmOptions{}), UsageError);
  CHECK_THROWS_AS(train_gaussian_hmm(std::vector<ObservationSequence>{}, HmmOptions{}), UsageError);
  CHECK_THROWS_AS(classify(HmmClassifier{}, short_seq[0]), UsageError);
}

TEST_CASE("constant observations are held up by the variance floor") {
  std::vector<ObservationSequence> seqs(2, ObservationSequence(6, Eigen::Vector2d(1, 2)));
  const auto r = train_gaussian_hmm(seqs, HmmOptions{});
  CHECK(r.model.variances.minCoeff() == doctest::Approx(1e-6));
  CHECK(std::isfinite(hmm_log_likelihood(r.model, seqs[0])));
}
