#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sentivec/corpus.hpp"

namespace sentivec {

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)) without overflow for large |x|.
inline double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

// Logistic classifier over document embeddings: p(+1 | phi) =
// sigmoid(theta . (W phi) + gamma). Only theta is L2-regularized.
struct Classifier {
  Eigen::VectorXd theta;
  double gamma = 0.0;
  double lambda_theta = 0.0;

  int dim() const { return static_cast<int>(theta.size()); }
};

// Word embeddings as columns: k x V, every column unit-norm.
struct EmbeddingMatrix {
  Eigen::MatrixXd w;

  int dim() const { return static_cast<int>(w.rows()); }
  int vocab_size() const { return static_cast<int>(w.cols()); }

  double max_column_norm_error() const {
    double worst = 0.0;
    for (int j = 0; j < w.cols(); ++j) {
      worst = std::max(worst, std::abs(w.col(j).norm() - 1.0));
    }
    return worst;
  }
};

struct ModelInputs {
  const Eigen::MatrixXd& phi;      // V x N document weights
  const std::vector<int>& labels;  // +1 / -1, length N
  ClassCosts costs;
};

inline Eigen::VectorXd doc_embedding(const EmbeddingMatrix& emb, const Eigen::VectorXd& phi) {
  if (phi.size() != emb.vocab_size()) {
    throw std::invalid_argument("document weight vector length does not match vocabulary size");
  }
  return emb.w * phi;
}

// Decision scores theta . (W phi_i) + gamma for every document.
inline Eigen::VectorXd scores(const Classifier& clf, const EmbeddingMatrix& emb,
                              const Eigen::MatrixXd& phi) {
  if (clf.dim() != emb.dim()) {
    throw std::invalid_argument("classifier and embedding dimensions differ");
  }
  Eigen::VectorXd theta_w = emb.w.transpose() * clf.theta;  // V
  return ((phi.transpose() * theta_w).array() + clf.gamma).matrix();
}

inline double predict_proba(const Classifier& clf, const EmbeddingMatrix& emb,
                            const Eigen::VectorXd& phi) {
  return sigmoid(clf.theta.dot(doc_embedding(emb, phi)) + clf.gamma);
}

// Cost-weighted negative log-likelihood plus the theta ridge term:
//   J = -(1/N) sum_i c_{y_i} log sigmoid(y_i (theta.W phi_i + gamma))
//       + lambda ||theta||^2.
inline double objective(const Classifier& clf, const EmbeddingMatrix& emb,
                        const ModelInputs& in) {
  const int n = static_cast<int>(in.labels.size());
  if (in.phi.cols() != n) {
    throw std::invalid_argument("label count does not match document count");
  }
  const Eigen::VectorXd s = scores(clf, emb, in.phi);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = in.labels[i] > 0 ? 1.0 : -1.0;
    loss -= in.costs.of_label(in.labels[i]) * log_sigmoid(y * s(i));
  }
  return loss / n + clf.lambda_theta * clf.theta.squaredNorm();
}

struct ThetaGradient {
  Eigen::VectorXd theta;
  double gamma = 0.0;

  double inf_norm() const { return std::max(theta.lpNorm<Eigen::Infinity>(), std::abs(gamma)); }
};

// Gradient of the objective in (theta, gamma) with W held fixed.
// d holds the document embeddings W*Phi (k x N), computed once by the caller.
inline ThetaGradient grad_theta(const Classifier& clf, const Eigen::MatrixXd& d,
                                const ModelInputs& in) {
  const int n = static_cast<int>(in.labels.size());
  if (d.cols() != n) throw std::invalid_argument("embedded documents do not match label count");
  ThetaGradient g;
  g.theta = Eigen::VectorXd::Zero(clf.dim());
  const Eigen::VectorXd s = ((d.transpose() * clf.theta).array() + clf.gamma).matrix();
  for (int i = 0; i < n; ++i) {
    const double y = in.labels[i] > 0 ? 1.0 : -1.0;
    const double coef = -in.costs.of_label(in.labels[i]) * y * sigmoid(-y * s(i));
    g.theta += coef * d.col(i);
    g.gamma += coef;
  }
  g.theta /= n;
  g.gamma /= n;
  g.theta += 2.0 * clf.lambda_theta * clf.theta;
  return g;
}

// Gradient of document i's cost term with respect to W; rank one:
//   -c_{y_i} y_i sigmoid(-y_i s_i) theta phi_i^T.
inline Eigen::MatrixXd grad_w_single(const Classifier& clf, const EmbeddingMatrix& emb,
                                     const Eigen::VectorXd& phi, int label, double cost) {
  const double y = label > 0 ? 1.0 : -1.0;
  const double s = clf.theta.dot(doc_embedding(emb, phi)) + clf.gamma;
  const double coef = -cost * y * sigmoid(-y * s);
  return coef * clf.theta * phi.transpose();
}

}  // namespace sentivec
