#include "defmag/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "defmag/error.hpp"

namespace defmag {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (m == kNegInf) return kNegInf;
  return m + std::log((v.array() - m).exp().sum());
}

Eigen::MatrixXd elementwise_log(const Eigen::MatrixXd& m) {
  return m.unaryExpr([](double x) { return x > 0.0 ? std::log(x) : kNegInf; });
}

struct Accumulators {
  Eigen::VectorXd initial;
  Eigen::MatrixXd transition;
  std::vector<Eigen::MatrixXd> gammas;  // per sequence, T x K
};

// Log-space forward-backward over one sequence; returns its log-likelihood
// and appends the state posteriors.
double expectation(const GaussianHmm& model, const ObservationSequence& seq, Accumulators& acc) {
  const Eigen::Index tn = static_cast<Eigen::Index>(seq.size());
  const int k = model.states();
  const Eigen::MatrixXd log_b = emission_log_densities(model, seq);
  const Eigen::VectorXd log_pi = elementwise_log(model.initial);
  const Eigen::MatrixXd log_a = elementwise_log(model.transition);

  Eigen::MatrixXd la(tn, k), lb(tn, k);
  Eigen::VectorXd tmp(k);
  for (int j = 0; j < k; ++j) la(0, j) = log_pi[j] + log_b(0, j);
  for (Eigen::Index t = 1; t < tn; ++t) {
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < k; ++i) tmp[i] = la(t - 1, i) + log_a(i, j);
      la(t, j) = log_sum_exp(tmp) + log_b(t, j);
    }
  }
  lb.row(tn - 1).setZero();
  for (Eigen::Index t = tn - 1; t-- > 0;) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) tmp[j] = log_a(i, j) + log_b(t + 1, j) + lb(t + 1, j);
      lb(t, i) = log_sum_exp(tmp);
    }
  }
  const double ll = log_sum_exp(la.row(tn - 1).transpose());
  if (!std::isfinite(ll)) throw NumericalError("HMM forward pass underflow: sequence has zero probability");

  Eigen::MatrixXd gamma = (la + lb).array() - ll;
  gamma = gamma.array().exp();
  for (Eigen::Index t = 0; t < tn; ++t) gamma.row(t) /= gamma.row(t).sum();
  acc.initial += gamma.row(0).transpose();
  for (Eigen::Index t = 0; t + 1 < tn; ++t) {
    for (int i = 0; i < k; ++i) {
      if (la(t, i) == kNegInf) continue;
      for (int j = 0; j < k; ++j) {
        if (log_a(i, j) == kNegInf) continue;
        acc.transition(i, j) += std::exp(la(t, i) + log_a(i, j) + log_b(t + 1, j) + lb(t + 1, j) - ll);
      }
    }
  }
  acc.gammas.push_back(std::move(gamma));
  return ll;
}

void maximization(GaussianHmm& model, std::span<const ObservationSequence> sequences,
                  const Accumulators& acc, double variance_floor) {
  const int k = model.states();
  const auto d = model.dim();
  model.initial = acc.initial / acc.initial.sum();
  for (int i = 0; i < k; ++i) {
    const double row = acc.transition.row(i).sum();
    if (row > 0.0) model.transition.row(i) = acc.transition.row(i) / row;
  }

  Eigen::VectorXd weight = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, d);
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& g = acc.gammas[s];
    for (std::size_t t = 0; t < sequences[s].size(); ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      weight += g.row(ti).transpose();
      sum += g.row(ti).transpose() * sequences[s][t].transpose();
    }
  }
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(k, d);
  Eigen::MatrixXd means = model.means;
  for (int i = 0; i < k; ++i) {
    if (weight[i] > 0.0) means.row(i) = sum.row(i) / weight[i];
  }
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& g = acc.gammas[s];
    for (std::size_t t = 0; t < sequences[s].size(); ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      for (int i = 0; i < k; ++i) {
        sq.row(i) += g(ti, i) * (sequences[s][t].transpose() - means.row(i)).cwiseAbs2();
      }
    }
  }
  for (int i = 0; i < k; ++i) {
    if (!(weight[i] > 0.0)) continue;
    model.means.row(i) = means.row(i);
    model.variances.row(i) = (sq.row(i) / weight[i]).cwiseMax(variance_floor);
  }
}

GaussianHmm initial_model(std::span<const ObservationSequence> sequences, const HmmOptions& options) {
  const int k = options.states;
  const auto d = sequences.front().front().size();
  GaussianHmm m;
  m.initial = Eigen::VectorXd::Zero(k);
  m.transition = Eigen::MatrixXd::Zero(k, k);
  m.means = Eigen::MatrixXd::Zero(k, d);
  m.variances = Eigen::MatrixXd::Zero(k, d);

  // Group frames per initial state.
  std::vector<std::vector<const Eigen::VectorXd*>> groups(static_cast<std::size_t>(k));
  std::size_t total_frames = 0;
  if (options.topology == HmmTopology::LeftToRight) {
    for (const auto& seq : sequences) {
      for (std::size_t t = 0; t < seq.size(); ++t) {
        groups[t * static_cast<std::size_t>(k) / seq.size()].push_back(&seq[t]);
      }
      total_frames += seq.size();
    }
    m.initial[0] = 1.0;
    const double mean_len = static_cast<double>(total_frames) / static_cast<double>(sequences.size());
    const double stay = std::clamp(1.0 - static_cast<double>(k) / mean_len, 0.5, 0.99);
    for (int i = 0; i + 1 < k; ++i) {
      m.transition(i, i) = stay;
      m.transition(i, i + 1) = 1.0 - stay;
    }
    m.transition(k - 1, k - 1) = 1.0;
  } else {
    std::vector<const Eigen::VectorXd*> frames;
    for (const auto& seq : sequences) {
      for (const auto& o : seq) frames.push_back(&o);
    }
    std::stable_sort(frames.begin(), frames.end(),
                     [](const Eigen::VectorXd* a, const Eigen::VectorXd* b) { return (*a)[0] < (*b)[0]; });
    for (std::size_t i = 0; i < frames.size(); ++i) {
      groups[i * static_cast<std::size_t>(k) / frames.size()].push_back(frames[i]);
    }
    m.initial.setConstant(1.0 / k);
    if (k == 1) {
      m.transition(0, 0) = 1.0;
    } else {
      m.transition.setConstant(0.5 / (k - 1));
      m.transition.diagonal().setConstant(0.5);
    }
  }

  for (int i = 0; i < k; ++i) {
    const auto& g = groups[static_cast<std::size_t>(i)];
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d), var = Eigen::VectorXd::Zero(d);
    for (const auto* o : g) mean += *o;
    if (!g.empty()) mean /= static_cast<double>(g.size());
    for (const auto* o : g) var += (*o - mean).cwiseAbs2();
    if (!g.empty()) var /= static_cast<double>(g.size());
    m.means.row(i) = mean.transpose();
    m.variances.row(i) = var.cwiseMax(options.variance_floor).transpose();
  }
  return m;
}

}  // namespace

double forward_log_likelihood(const Eigen::VectorXd& log_initial, const Eigen::MatrixXd& log_transition,
                              const Eigen::MatrixXd& log_emission) {
  const auto k = log_initial.size();
  if (log_emission.rows() == 0) throw DataError("log-likelihood of an empty sequence");
  if (log_transition.rows() != k || log_transition.cols() != k || log_emission.cols() != k) {
    throw DataError("HMM parameter shapes do not match");
  }
  Eigen::VectorXd alpha = log_initial + log_emission.row(0).transpose();
  Eigen::VectorXd next(k);
  for (Eigen::Index t = 1; t < log_emission.rows(); ++t) {
    for (Eigen::Index j = 0; j < k; ++j) {
      next[j] = log_sum_exp(alpha + log_transition.col(j)) + log_emission(t, j);
    }
    alpha.swap(next);
  }
  return log_sum_exp(alpha);
}

Eigen::MatrixXd emission_log_densities(const GaussianHmm& model, const ObservationSequence& seq) {
  const int k = model.states();
  const auto d = model.dim();
  Eigen::VectorXd log_norm(k);
  const Eigen::MatrixXd inv_var = model.variances.cwiseInverse();
  for (int i = 0; i < k; ++i) {
    log_norm[i] = -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) +
                          model.variances.row(i).array().log().sum());
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(seq.size()), k);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (seq[t].size() != d) {
      throw DataError("observation dimension " + std::to_string(seq[t].size()) +
                      " does not match the HMM (" + std::to_string(d) + ")");
    }
    for (int i = 0; i < k; ++i) {
      const double maha = ((seq[t].transpose() - model.means.row(i)).cwiseAbs2().cwiseProduct(inv_var.row(i))).sum();
      out(static_cast<Eigen::Index>(t), i) = log_norm[i] - 0.5 * maha;
    }
  }
  return out;
}

double hmm_log_likelihood(const GaussianHmm& model, const ObservationSequence& seq) {
  if (seq.empty()) throw DataError("log-likelihood of an empty sequence");
  return forward_log_likelihood(elementwise_log(model.initial), elementwise_log(model.transition),
                                emission_log_densities(model, seq));
}

HmmTrainResult train_gaussian_hmm(std::span<const ObservationSequence> sequences,
                                  const HmmOptions& options) {
  if (options.states < 1) throw UsageError("HMM needs at least one state");
  if (sequences.empty()) throw UsageError("HMM training needs at least one sequence");
  const auto d = sequences.front().empty() ? 0 : sequences.front().front().size();
  for (const auto& s : sequences) {
    if (s.size() < static_cast<std::size_t>(options.states)) {
      throw UsageError("every training sequence needs at least " + std::to_string(options.states) +
                       " frames");
    }
    for (const auto& o : s) {
      if (o.size() != d) throw DataError("observations differ in dimension");
    }
  }

  HmmTrainResult result;
  result.model = initial_model(sequences, options);
  const int k = options.states;
  for (int it = 0;; ++it) {
    Accumulators acc{Eigen::VectorXd::Zero(k), Eigen::MatrixXd::Zero(k, k), {}};
    acc.gammas.reserve(sequences.size());
    double ll = 0.0;
    for (const auto& s : sequences) ll += expectation(result.model, s, acc);
    result.log_likelihood.push_back(ll);
    const auto n = result.log_likelihood.size();
    if (n >= 2 && ll - result.log_likelihood[n - 2] < options.tolerance) break;
    if (it >= options.max_iterations) break;
    // The E-step of a model is needed to report its likelihood, so the last
    // accepted model is the one just evaluated.
    maximization(result.model, sequences, acc, options.variance_floor);
    result.iterations = it + 1;
  }
  return result;
}

HmmClassifier train_hmm(std::span<const ObservationSequence> sequences, std::span<const int> labels,
                        int num_classes, const HmmOptions& options) {
  if (sequences.size() != labels.size()) throw UsageError("sequences and labels differ in count");
  HmmClassifier clf;
  clf.models.resize(static_cast<std::size_t>(num_classes));
  clf.present.assign(static_cast<std::size_t>(num_classes), false);
  for (int c = 0; c < num_classes; ++c) {
    std::vector<ObservationSequence> mine;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) mine.push_back(sequences[i]);
    }
    if (mine.empty()) continue;
    clf.models[static_cast<std::size_t>(c)] = train_gaussian_hmm(mine, options).model;
    clf.present[static_cast<std::size_t>(c)] = true;
  }
  if (std::none_of(clf.present.begin(), clf.present.end(), [](bool b) { return b; })) {
    throw UsageError("HMM training needs at least one labelled sequence");
  }
  return clf;
}

Eigen::VectorXd hmm_scores(const HmmClassifier& clf, const ObservationSequence& seq) {
  if (!clf.trained()) throw UsageError("HMM classifier is not trained");
  Eigen::VectorXd scores(clf.num_classes());
  for (int c = 0; c < clf.num_classes(); ++c) {
    scores[c] = clf.present[static_cast<std::size_t>(c)]
                    ? hmm_log_likelihood(clf.models[static_cast<std::size_t>(c)], seq)
                    : kNegInf;
  }
  return scores;
}

Prediction classify(const HmmClassifier& clf, const ObservationSequence& seq) {
  Prediction p;
  p.scores = hmm_scores(clf, seq);
  p.label = argmax_label(p.scores);
  return p;
}

}  // namespace defmag
