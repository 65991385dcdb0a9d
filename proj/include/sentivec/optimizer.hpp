#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sentivec/corpus.hpp"
#include "sentivec/model.hpp"
#include "sentivec/rng.hpp"
#include "sentivec/spectrum.hpp"

namespace sentivec {

enum class InitMethod { lsa, file, random };

inline std::string to_string(InitMethod m) {
  switch (m) {
    case InitMethod::lsa: return "lsa";
    case InitMethod::file: return "file";
    default: return "random";
  }
}

// Per-document step size eta_t. `harmonic` is eta0/t; `factorial` divides
// the running step by t each document, which collapses to ~0 within a few
// documents and exists only for side-by-side comparison.
enum class StepDecay { harmonic, factorial };

struct TrainConfig {
  int k = 0;                    // 0 = select via the spectrum at `epsilon`
  double epsilon = 0.3;
  double lambda_theta = 1e-3;
  double eta0 = 0.1;
  int tau = 50;                 // suffix-averaging window (capped at N)
  int max_outer_iters = 50;
  double convergence_tol = 1e-5;
  std::uint64_t seed = 0;
  InitMethod init = InitMethod::lsa;
  std::string init_file;
  bool lsa_scale_by_sigma = false;
  StepDecay decay = StepDecay::harmonic;
  TermWeighting weighting = TermWeighting::tf;
  double inner_tol = 1e-8;
  int inner_max_iters = 100;

  void validate() const {
    if (k < 0) throw std::invalid_argument("k must be >= 0 (0 selects from the spectrum)");
    if (k == 0 && !(epsilon >= 0.0 && epsilon <= 1.0)) {
      throw std::invalid_argument("epsilon must lie in [0, 1]");
    }
    if (lambda_theta < 0.0) throw std::invalid_argument("lambda_theta must be >= 0");
    if (!(eta0 > 0.0)) throw std::invalid_argument("eta0 must be > 0");
    if (tau < 1) throw std::invalid_argument("tau must be >= 1");
    if (max_outer_iters < 1) throw std::invalid_argument("max_outer_iters must be >= 1");
    if (!(convergence_tol > 0.0)) throw std::invalid_argument("convergence_tol must be > 0");
    if (inner_tol <= 0.0) throw std::invalid_argument("inner_tol must be > 0");
    if (inner_max_iters < 1) throw std::invalid_argument("inner_max_iters must be >= 1");
    if (init == InitMethod::file && init_file.empty()) {
      throw std::invalid_argument("init=file requires an embedding file path");
    }
  }
};

struct TrainTrace {
  double initial_objective = 0.0;
  std::vector<double> objectives;  // J after each completed outer iteration
  int iterations = 0;
  bool converged = false;

  double final_objective() const {
    return objectives.empty() ? initial_objective : objectives.back();
  }
};

struct TrainedModel {
  Vocabulary vocab;
  EmbeddingMatrix embedding;
  Classifier clf;
  TrainConfig config;  // as used: k holds the actual dimension
  TrainTrace trace;
  Eigen::VectorXd idf;  // empty unless weighting == tf_idf
};

// Newton's method with Armijo backtracking for the convex subproblem in
// (theta, gamma). `d` holds the embedded documents W*Phi, fixed here.
// Iterates warm-start from clf's current values.
inline int solve_theta(Classifier& clf, const Eigen::MatrixXd& d, const ModelInputs& in,
                       double tol, int max_iters) {
  const int k = clf.dim();
  const int n = static_cast<int>(in.labels.size());
  if (d.rows() != k) throw std::invalid_argument("embedded documents do not match theta dimension");

  const auto eval = [&](const Eigen::VectorXd& theta, double gamma) {
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double y = in.labels[i] > 0 ? 1.0 : -1.0;
      const double s = theta.dot(d.col(i)) + gamma;
      loss -= in.costs.of_label(in.labels[i]) * log_sigmoid(y * s);
    }
    return loss / n + clf.lambda_theta * theta.squaredNorm();
  };

  double value = eval(clf.theta, clf.gamma);
  if (!std::isfinite(value)) throw std::runtime_error("non-finite objective in the theta solve");

  int iter = 0;
  for (; iter < max_iters; ++iter) {
    const ThetaGradient g = grad_theta(clf, d, in);
    if (g.inf_norm() <= tol) break;

    // Hessian over the augmented variable (theta, gamma).
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k + 1, k + 1);
    for (int i = 0; i < n; ++i) {
      const double s = clf.theta.dot(d.col(i)) + clf.gamma;
      const double p = sigmoid(s);
      const double wi = in.costs.of_label(in.labels[i]) * p * (1.0 - p);
      Eigen::VectorXd x(k + 1);
      x.head(k) = d.col(i);
      x(k) = 1.0;
      h.noalias() += wi * x * x.transpose();
    }
    h /= n;
    h.topLeftCorner(k, k) += 2.0 * clf.lambda_theta * Eigen::MatrixXd::Identity(k, k);
    h += 1e-10 * Eigen::MatrixXd::Identity(k + 1, k + 1);

    Eigen::VectorXd grad(k + 1);
    grad.head(k) = g.theta;
    grad(k) = g.gamma;
    Eigen::VectorXd step = h.ldlt().solve(-grad);

    double slope = grad.dot(step);
    if (!(slope < 0.0)) {  // fall back on steepest descent if LDLT degenerated
      step = -grad;
      slope = -grad.squaredNorm();
    }

    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Eigen::VectorXd theta_try = clf.theta + alpha * step.head(k);
      const double gamma_try = clf.gamma + alpha * step(k);
      const double value_try = eval(theta_try, gamma_try);
      if (std::isfinite(value_try) && value_try <= value + 1e-4 * alpha * slope) {
        clf.theta = theta_try;
        clf.gamma = gamma_try;
        value = value_try;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // at numerical precision already
  }
  if (!clf.theta.allFinite() || !std::isfinite(clf.gamma)) {
    throw std::runtime_error("theta solve produced non-finite values");
  }
  return iter;
}

namespace detail {

// Sparse view of one document: indices and weights of its nonzero words.
struct DocEntries {
  std::vector<int> word;
  std::vector<double> weight;
};

inline std::vector<DocEntries> sparsify_columns(const Eigen::MatrixXd& phi) {
  std::vector<DocEntries> docs(phi.cols());
  for (int i = 0; i < phi.cols(); ++i) {
    for (int j = 0; j < phi.rows(); ++j) {
      if (phi(j, i) != 0.0) {
        docs[i].word.push_back(j);
        docs[i].weight.push_back(phi(j, i));
      }
    }
  }
  return docs;
}

}  // namespace detail

// One projected-SGD epoch over the embedding matrix at fixed theta.
// Visits all documents in a seeded shuffle; after each rank-one step the
// touched columns are re-projected to unit norm; the returned matrix is
// the unit-normalized average of the last min(tau, N) projected iterates.
// Columns of words absent from every document pass through unchanged.
inline Eigen::MatrixXd sgd_epoch_w(const Eigen::MatrixXd& w0, const Classifier& clf,
                                   const ModelInputs& in, double eta0, int tau,
                                   std::uint64_t epoch_seed,
                                   StepDecay decay = StepDecay::harmonic) {
  const int n = static_cast<int>(in.labels.size());
  if (in.phi.cols() != n) throw std::invalid_argument("label count does not match document count");
  if (n == 0) throw std::invalid_argument("cannot run an epoch over zero documents");
  if (!(eta0 > 0.0)) throw std::invalid_argument("eta0 must be > 0");
  if (tau < 1) throw std::invalid_argument("tau must be >= 1");

  const auto docs = detail::sparsify_columns(in.phi);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(epoch_seed);
  rng.shuffle(order);
  const bool theta_zero = clf.theta.isZero(0.0);

  Eigen::MatrixXd w = w0;
  std::vector<char> touched(w.cols(), 0);
  const int window = std::min(tau, n);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(w.rows(), w.cols());

  double eta = eta0;
  for (int t = 1; t <= n; ++t) {
    const int i = order[t - 1];
    const auto& doc = docs[i];
    if (decay == StepDecay::harmonic) {
      eta = eta0 / t;
    } else {
      eta /= t;
    }

    double s = clf.gamma;
    for (std::size_t e = 0; e < doc.word.size(); ++e) {
      s += doc.weight[e] * clf.theta.dot(w.col(doc.word[e]));
    }
    const double y = in.labels[i] > 0 ? 1.0 : -1.0;
    // Rank-one gradient of this document's cost: coef * theta * phi_i^T.
    const double coef = -in.costs.of_label(in.labels[i]) * y * sigmoid(-y * s);

    for (std::size_t e = 0; e < doc.word.size(); ++e) {
      const int j = doc.word[e];
      const double scale = eta * coef * doc.weight[e];
      if (scale == 0.0 || theta_zero) continue;  // exact no-op; leave the column's bits alone
      w.col(j) -= scale * clf.theta;
      const double norm = w.col(j).norm();
      if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw std::runtime_error(
            "embedding column " + std::to_string(j) +
            " degenerated during SGD (zero or non-finite norm); reduce eta0");
      }
      w.col(j) /= norm;
      touched[j] = 1;
    }
    if (t > n - window) sum += w;
  }

  Eigen::MatrixXd avg = sum / window;
  for (int j = 0; j < avg.cols(); ++j) {
    if (!touched[j]) {
      avg.col(j) = w0.col(j);  // bit-identical pass-through
      continue;
    }
    const double norm = avg.col(j).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::runtime_error("averaged embedding column " + std::to_string(j) +
                               " has zero or non-finite norm; reduce eta0");
    }
    avg.col(j) /= norm;
  }
  return avg;
}

// Vocabulary, weight matrix, labels and class costs for one training run.
struct TrainingData {
  Vocabulary vocab;
  Eigen::MatrixXd phi;
  Eigen::VectorXd idf;
  std::vector<int> labels;
  ClassCosts costs;
};

inline TrainingData prepare_training_data(const Corpus& corpus, TermWeighting weighting) {
  TrainingData data;
  data.vocab = build_vocabulary(corpus);
  DocTermMatrix m = build_term_matrix(corpus, data.vocab, weighting);
  data.phi = std::move(m.entries);
  data.idf = std::move(m.idf);
  data.labels = corpus_labels(corpus);
  data.costs = class_costs(data.labels);
  return data;
}

using TrainObserver =
    std::function<void(int iteration, const Classifier&, const EmbeddingMatrix&, double objective)>;

// Alternating minimization: solve for (theta, gamma) at fixed W, then run
// one projected-SGD epoch over W at fixed theta; stop when the objective
// decrease falls to convergence_tol or the iteration cap is hit.
inline TrainedModel train(const TrainingData& data, TrainConfig config,
                          const TrainObserver& observer = nullptr,
                          EffectiveRankCurve* curve_out = nullptr) {
  config.validate();
  if (config.k == 0) {
    EffectiveRankCurve curve = effective_rank(data.phi, config.epsilon);
    config.k = curve.chosen_k;
    if (curve_out) *curve_out = std::move(curve);
  }
  const int k = config.k;
  const int max_k = static_cast<int>(std::min(data.phi.rows(), data.phi.cols()));
  if (k > max_k) {
    throw std::invalid_argument("k = " + std::to_string(k) + " exceeds min(V, N) = " +
                                std::to_string(max_k));
  }

  Rng master(config.seed);
  const std::uint64_t init_seed = master.next_u64();

  TrainedModel model;
  model.vocab = data.vocab;
  model.config = config;
  model.idf = data.idf;
  switch (config.init) {
    case InitMethod::lsa:
      model.embedding.w = lsa_init(data.phi, k, &data.vocab.words, config.lsa_scale_by_sigma);
      break;
    case InitMethod::file:
      model.embedding.w = read_embeddings(config.init_file, data.vocab, k, init_seed);
      break;
    case InitMethod::random: {
      Rng rng(init_seed);
      model.embedding.w = random_unit_columns(k, data.vocab.size(), rng);
      break;
    }
  }

  model.clf.theta = Eigen::VectorXd::Zero(k);
  model.clf.gamma = 0.0;
  model.clf.lambda_theta = config.lambda_theta;

  const ModelInputs in{data.phi, data.labels, data.costs};
  model.trace.initial_objective = objective(model.clf, model.embedding, in);
  double previous = model.trace.initial_objective;

  for (int iter = 1; iter <= config.max_outer_iters; ++iter) {
    const Eigen::MatrixXd d = model.embedding.w * data.phi;
    solve_theta(model.clf, d, in, config.inner_tol, config.inner_max_iters);
    model.embedding.w = sgd_epoch_w(model.embedding.w, model.clf, in, config.eta0, config.tau,
                                    master.next_u64(), config.decay);

    const double value = objective(model.clf, model.embedding, in);
    if (!std::isfinite(value)) {
      throw std::runtime_error("objective became non-finite at iteration " +
                               std::to_string(iter) + "; reduce eta0");
    }
    model.trace.objectives.push_back(value);
    model.trace.iterations = iter;
    if (observer) observer(iter, model.clf, model.embedding, value);
    if (std::abs(previous - value) <= config.convergence_tol) {
      model.trace.converged = true;
      break;
    }
    previous = value;
  }
  return model;
}

inline TrainedModel train(const Corpus& corpus, const TrainConfig& config,
                          const TrainObserver& observer = nullptr,
                          EffectiveRankCurve* curve_out = nullptr) {
  return train(prepare_training_data(corpus, config.weighting), config, observer, curve_out);
}

}  // namespace sentivec
