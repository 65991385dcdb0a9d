#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "sentivec/model.hpp"
#include "sentivec/rng.hpp"

using namespace sentivec;

namespace {

// Term-by-term objective in extended precision, straight from the formula.
double objective_reference(const Eigen::VectorXd& theta, double gamma, double lambda,
                           const Eigen::MatrixXd& w, const Eigen::MatrixXd& phi,
                           const std::vector<int>& labels, const ClassCosts& costs) {
  const int n = static_cast<int>(labels.size());
  long double loss = 0.0L;
  for (int i = 0; i < n; ++i) {
    long double s = gamma;
    for (int r = 0; r < w.rows(); ++r) {
      long double d = 0.0L;
      for (int j = 0; j < w.cols(); ++j) {
        d += static_cast<long double>(w(r, j)) * phi(j, i);
      }
      s += static_cast<long double>(theta(r)) * d;
    }
    const long double y = labels[i] > 0 ? 1.0L : -1.0L;
    const long double cost = labels[i] > 0 ? costs.c_plus : costs.c_minus;
    loss += cost * std::log(1.0L + std::exp(-y * s));  // -log sigmoid(y s)
  }
  long double reg = 0.0L;
  for (int r = 0; r < theta.size(); ++r) {
    reg += static_cast<long double>(theta(r)) * theta(r);
  }
  return static_cast<double>(loss / n + lambda * reg);
}

struct TinyInstance {
  Eigen::MatrixXd phi;
  std::vector<int> labels;
  ClassCosts costs;
  Eigen::MatrixXd w;
  Eigen::VectorXd theta;
  double gamma = 0.0;
};

TinyInstance random_instance(Rng& rng, int k, int v, int n) {
  TinyInstance t;
  t.phi.resize(v, n);
  for (int j = 0; j < v; ++j) {
    for (int i = 0; i < n; ++i) {
      t.phi(j, i) = rng.below(3) == 0 ? 0.0 : std::floor(rng.uniform(0.0, 4.0)) + 1.0;
    }
  }
  t.labels.resize(n);
  t.labels[0] = 1;
  t.labels[1] = -1;
  for (int i = 2; i < n; ++i) t.labels[i] = rng.below(2) ? 1 : -1;
  t.costs = class_costs(t.labels);
  t.w.resize(k, v);
  for (int j = 0; j < v; ++j) {
    for (int r = 0; r < k; ++r) t.w(r, j) = rng.normal();
    t.w.col(j) /= t.w.col(j).norm();
  }
  t.theta.resize(k);
  for (int r = 0; r < k; ++r) t.theta(r) = rng.normal();
  t.gamma = rng.normal();
  return t;
}

}  // namespace

TEST_CASE("sigmoid is stable and symmetric") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(710.0) == 1.0);
  const double tiny = sigmoid(-710.0);
  CHECK(tiny >= 0.0);
  CHECK(std::isfinite(tiny));
  CHECK_THAT(sigmoid(0.3), Catch::Matchers::WithinAbs(0.57444251681165898715, 1e-16));
  for (double z : {0.1, 1.0, 3.7, 25.0}) {
    CHECK_THAT(sigmoid(z) + sigmoid(-z), Catch::Matchers::WithinAbs(1.0, 1e-15));
  }
  CHECK_THAT(log_sigmoid(-745.0), Catch::Matchers::WithinRel(-745.0, 1e-12));
  CHECK(std::isfinite(log_sigmoid(745.0)));
}

TEST_CASE("doc_embedding is the weighted column sum") {
  EmbeddingMatrix emb;
  emb.w.resize(2, 2);
  emb.w << 1.0, 0.0,
           0.0, 1.0;
  Eigen::VectorXd one_hot(2);
  one_hot << 0.0, 1.0;
  CHECK(doc_embedding(emb, one_hot) == emb.w.col(1));

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  CHECK(doc_embedding(emb, zero).norm() == 0.0);

  Eigen::VectorXd two_one(2);
  two_one << 2.0, 1.0;
  const Eigen::VectorXd d = doc_embedding(emb, two_one);
  CHECK((d - (2.0 * emb.w.col(0) + emb.w.col(1))).norm() == 0.0);

  Eigen::VectorXd wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(doc_embedding(emb, wrong), std::invalid_argument);
}

TEST_CASE("predict_proba evaluates the logistic link") {
  EmbeddingMatrix emb;
  emb.w = Eigen::MatrixXd::Identity(2, 2);
  Classifier clf;
  clf.theta.resize(2);
  clf.theta << 1.0, 0.0;
  clf.gamma = 0.0;

  Eigen::VectorXd phi(2);
  phi << 0.3, -0.9;  // W*phi = (0.3, -0.9)
  CHECK_THAT(predict_proba(clf, emb, phi),
             Catch::Matchers::WithinAbs(0.57444251681165898715, 1e-15));

  Classifier flat;
  flat.theta = Eigen::VectorXd::Zero(2);
  CHECK(predict_proba(flat, emb, phi) == 0.5);

  Classifier biased = clf;
  biased.gamma = 40.0;
  CHECK(predict_proba(biased, emb, phi) > 0.9999);
}

TEST_CASE("objective closed forms") {
  const int n = 4;
  EmbeddingMatrix emb;
  emb.w = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(2, n);
  const std::vector<int> labels{1, 1, -1, -1};
  const ClassCosts costs = class_costs(labels);
  const ModelInputs in{phi, labels, costs};

  Classifier clf;
  clf.theta = Eigen::VectorXd::Zero(2);
  // theta = 0, gamma = 0: every document contributes ln 2 at its cost.
  CHECK_THAT(objective(clf, emb, in),
             Catch::Matchers::WithinAbs(0.34657359027997265471, 1e-15));

  // With zero weights the scores stay zero; the ridge term adds exactly 2.
  Classifier ridge = clf;
  ridge.theta << 1.0, 1.0;
  ridge.lambda_theta = 1.0;
  CHECK_THAT(objective(ridge, emb, in),
             Catch::Matchers::WithinAbs(0.34657359027997265471 + 2.0, 1e-14));
}

TEST_CASE("objective matches a term-by-term extended-precision oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    TinyInstance t = random_instance(rng, 2, 3, 3);
    Classifier clf;
    clf.theta = t.theta;
    clf.gamma = t.gamma;
    clf.lambda_theta = 0.01 * (trial + 1);
    EmbeddingMatrix emb;
    emb.w = t.w;
    const ModelInputs in{t.phi, t.labels, t.costs};
    const double ref = objective_reference(t.theta, t.gamma, clf.lambda_theta, t.w, t.phi,
                                           t.labels, t.costs);
    CHECK_THAT(objective(clf, emb, in), Catch::Matchers::WithinRel(ref, 1e-12));
  }
}

TEST_CASE("objective decomposes into data term plus ridge") {
  Rng rng(32);
  TinyInstance t = random_instance(rng, 3, 4, 5);
  EmbeddingMatrix emb;
  emb.w = t.w;
  const ModelInputs in{t.phi, t.labels, t.costs};
  Classifier with;
  with.theta = t.theta;
  with.gamma = t.gamma;
  with.lambda_theta = 0.37;
  Classifier without = with;
  without.lambda_theta = 0.0;
  CHECK_THAT(objective(with, emb, in) - objective(without, emb, in),
             Catch::Matchers::WithinRel(0.37 * t.theta.squaredNorm(), 1e-12));
}

TEST_CASE("grad_theta vanishes for symmetric data and follows the ridge limit") {
  // Positive and negative documents are mirror images.
  Eigen::MatrixXd phi(2, 2);
  phi << 1.0, -1.0,
         2.0, -2.0;
  const std::vector<int> labels{1, -1};
  const ClassCosts costs = class_costs(labels);
  EmbeddingMatrix emb;
  emb.w = Eigen::MatrixXd::Identity(2, 2);
  Classifier clf;
  clf.theta = Eigen::VectorXd::Zero(2);
  const ModelInputs in{phi, labels, costs};
  const ThetaGradient g = grad_theta(clf, emb.w * phi, in);
  CHECK_THAT(g.gamma, Catch::Matchers::WithinAbs(0.0, 1e-15));

  Classifier heavy;
  heavy.theta.resize(2);
  heavy.theta << 0.5, -0.25;
  heavy.lambda_theta = 1e6;
  const ThetaGradient hg = grad_theta(heavy, emb.w * phi, in);
  CHECK_THAT(hg.theta(0), Catch::Matchers::WithinRel(2e6 * 0.5, 1e-5));
  CHECK_THAT(hg.theta(1), Catch::Matchers::WithinRel(2e6 * -0.25, 1e-5));
}

TEST_CASE("gradients match central finite differences") {
  Rng rng(33);
  for (int trial = 0; trial < 12; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(3));
    const int v = 3 + static_cast<int>(rng.below(4));
    const int n = 3 + static_cast<int>(rng.below(6));
    TinyInstance t = random_instance(rng, k, v, n);
    Classifier clf;
    clf.theta = t.theta;
    clf.gamma = t.gamma;
    clf.lambda_theta = 0.05;
    EmbeddingMatrix emb;
    emb.w = t.w;
    const ModelInputs in{t.phi, t.labels, t.costs};

    const ThetaGradient g = grad_theta(clf, emb.w * t.phi, in);
    for (int r = 0; r < k; ++r) {
      const double fd = oracle::central_difference([&](double h) {
        Classifier c = clf;
        c.theta(r) += h;
        return objective(c, emb, in);
      });
      CHECK_THAT(g.theta(r), Catch::Matchers::WithinRel(fd, 1e-5));
    }
    const double fd_gamma = oracle::central_difference([&](double h) {
      Classifier c = clf;
      c.gamma += h;
      return objective(c, emb, in);
    });
    CHECK_THAT(g.gamma, Catch::Matchers::WithinRel(fd_gamma, 1e-5));

    // Full W gradient as the cost-weighted sum of per-document terms / N.
    Eigen::MatrixXd gw = Eigen::MatrixXd::Zero(k, v);
    for (int i = 0; i < n; ++i) {
      gw += grad_w_single(clf, emb, t.phi.col(i), t.labels[i],
                          t.costs.of_label(t.labels[i]));
    }
    gw /= n;
    for (int r = 0; r < k; ++r) {
      for (int j = 0; j < v; ++j) {
        const double fd = oracle::central_difference([&](double h) {
          EmbeddingMatrix e2 = emb;
          e2.w(r, j) += h;
          return objective(clf, e2, in);
        });
        if (std::abs(fd) < 1e-12) {
          CHECK_THAT(gw(r, j), Catch::Matchers::WithinAbs(0.0, 1e-9));
        } else {
          CHECK_THAT(gw(r, j), Catch::Matchers::WithinRel(fd, 1e-5));
        }
      }
    }
  }
}

TEST_CASE("grad_w_single structure") {
  EmbeddingMatrix emb;
  emb.w = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd phi(2);
  phi << 0.0, 3.0;

  Classifier zero;
  zero.theta = Eigen::VectorXd::Zero(2);
  CHECK(grad_w_single(zero, emb, phi, 1, 0.5).cwiseAbs().maxCoeff() == 0.0);

  Classifier clf;
  clf.theta.resize(2);
  clf.theta << 0.5, -1.0;
  const Eigen::MatrixXd g = grad_w_single(clf, emb, phi, -1, 0.7);
  CHECK(g.col(0).cwiseAbs().maxCoeff() == 0.0);  // phi(0) = 0
  CHECK(g.col(1).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("single-document gradient frozen-value example") {
  // k=2, V=1, theta=(1,1), w = (1,0), phi = 1, y = +1, cost = 1, gamma = 0:
  // score = 1, so the gradient is -sigmoid(-1) * theta * 1.
  EmbeddingMatrix emb;
  emb.w.resize(2, 1);
  emb.w << 1.0, 0.0;
  Classifier clf;
  clf.theta.resize(2);
  clf.theta << 1.0, 1.0;
  Eigen::VectorXd phi(1);
  phi << 1.0;
  const Eigen::MatrixXd g = grad_w_single(clf, emb, phi, 1, 1.0);
  const double sig = 0.26894142136999512075;  // sigmoid(-1)
  CHECK_THAT(g(0, 0), Catch::Matchers::WithinAbs(-sig, 1e-16));
  CHECK_THAT(g(1, 0), Catch::Matchers::WithinAbs(-sig, 1e-16));
}

TEST_CASE("scores and dimension mismatches") {
  EmbeddingMatrix emb;
  emb.w = Eigen::MatrixXd::Identity(2, 2);
  Classifier clf;
  clf.theta.resize(3);
  clf.theta.setZero();
  CHECK_THROWS_AS(scores(clf, emb, Eigen::MatrixXd::Zero(2, 1)), std::invalid_argument);

  clf.theta.resize(2);
  clf.theta << 1.0, 2.0;
  clf.gamma = 0.25;
  Eigen::MatrixXd phi(2, 2);
  phi << 1.0, 0.0,
         0.0, 1.0;
  const Eigen::VectorXd s = scores(clf, emb, phi);
  CHECK_THAT(s(0), Catch::Matchers::WithinAbs(1.25, 1e-15));
  CHECK_THAT(s(1), Catch::Matchers::WithinAbs(2.25, 1e-15));
}
