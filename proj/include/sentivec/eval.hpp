#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentivec/corpus.hpp"
#include "sentivec/model.hpp"
#include "sentivec/model_io.hpp"
#include "sentivec/optimizer.hpp"
#include "sentivec/rng.hpp"

namespace sentivec {

// tp / (tp + fp). Empty when no positive predictions were made, so the
// caller can report "undefined" instead of a silent zero.
inline std::optional<double> precision(const std::vector<int>& predictions,
                                       const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("predictions and labels differ in length");
  }
  int tp = 0;
  int fp = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] > 0) {
      (labels[i] > 0 ? tp : fp) += 1;
    }
  }
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(tp) / (tp + fp);
}

// Area under the ROC curve by the trapezoidal rule over score thresholds.
// Tied scores are swept as one group, so each tie contributes half — the
// result equals the Mann–Whitney pair statistic.
inline double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  const std::size_t n = scores.size();
  if (labels.size() != n) throw std::invalid_argument("scores and labels differ in length");
  long n_pos = 0;
  long n_neg = 0;
  for (int y : labels) (y > 0 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    throw std::runtime_error("ROC AUC needs both classes present");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  double area = 0.0;
  long tp = 0;
  long fp = 0;
  std::size_t i = 0;
  while (i < n) {
    long group_tp = 0;
    long group_fp = 0;
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] > 0 ? group_tp : group_fp) += 1;
      ++j;
    }
    // Trapezoid between the curve points before and after this threshold.
    area += static_cast<double>(group_fp) * (2.0 * tp + group_tp);
    tp += group_tp;
    fp += group_fp;
    i = j;
  }
  return area / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct SplitMetrics {
  int split = 0;
  std::optional<double> precision;
  double auc = 0.0;
  int chosen_k = 0;
  int iterations = 0;
  bool converged = false;
  int n_train = 0;
  int n_test = 0;
};

struct EvalReport {
  std::vector<SplitMetrics> splits;
  double mean_precision = 0.0;
  double std_precision = 0.0;
  int n_undefined_precision = 0;
  double mean_auc = 0.0;
  double std_auc = 0.0;
  TrainConfig config;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (xs.size() - 1))};
}

inline Corpus subset(const Corpus& corpus, const std::vector<int>& idx) {
  Corpus out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(corpus.at(i));
  return out;
}

}  // namespace detail

inline TrainedModel train_on_partition(const Corpus& corpus, const std::vector<int>& train_idx,
                                       const TrainConfig& config) {
  return train(detail::subset(corpus, train_idx), config);
}

// Probabilities for documents scored against a trained model's vocabulary
// and weighting. Out-of-vocabulary tokens are ignored; a document with no
// known tokens scores sigmoid(gamma).
inline Eigen::VectorXd predict_corpus(const TrainedModel& model, const Corpus& corpus) {
  const Eigen::MatrixXd phi =
      weight_documents(corpus, model.vocab, model.config.weighting, model.idf);
  Eigen::VectorXd s = scores(model.clf, model.embedding, phi);
  for (int i = 0; i < s.size(); ++i) s(i) = sigmoid(s(i));
  return s;
}

// Trains one model per split on its training partition only and scores the
// held-out documents; probabilities are thresholded at 0.5 for precision
// and used raw for AUC. Per-split seeds derive from config.seed.
inline EvalReport evaluate_splits(const Corpus& corpus, const SplitSet& splits,
                                  const TrainConfig& config) {
  EvalReport report;
  report.config = config;
  std::vector<double> precisions;
  std::vector<double> aucs;
  for (int s = 0; s < static_cast<int>(splits.pairs.size()); ++s) {
    try {
      const SplitPair& pair = splits.pairs[s];
      TrainConfig cfg = config;
      cfg.seed = mix_seed(config.seed, static_cast<std::uint64_t>(s) + 1);
      const TrainedModel model = train_on_partition(corpus, pair.train, cfg);

      const Corpus test_docs = detail::subset(corpus, pair.test);
      const Eigen::VectorXd probs = predict_corpus(model, test_docs);
      std::vector<int> predictions(test_docs.size());
      std::vector<int> labels(test_docs.size());
      std::vector<double> score_list(test_docs.size());
      for (std::size_t i = 0; i < test_docs.size(); ++i) {
        predictions[i] = probs(static_cast<int>(i)) > 0.5 ? 1 : -1;
        labels[i] = test_docs[i].label;
        score_list[i] = probs(static_cast<int>(i));
      }

      SplitMetrics m;
      m.split = s;
      m.precision = precision(predictions, labels);
      m.auc = roc_auc(score_list, labels);
      m.chosen_k = model.config.k;
      m.iterations = model.trace.iterations;
      m.converged = model.trace.converged;
      m.n_train = static_cast<int>(pair.train.size());
      m.n_test = static_cast<int>(pair.test.size());
      if (m.precision) {
        precisions.push_back(*m.precision);
      } else {
        ++report.n_undefined_precision;
      }
      aucs.push_back(m.auc);
      report.splits.push_back(std::move(m));
    } catch (const std::exception& e) {
      throw std::runtime_error("split " + std::to_string(s) + ": " + e.what());
    }
  }
  std::tie(report.mean_precision, report.std_precision) = detail::mean_std(precisions);
  std::tie(report.mean_auc, report.std_auc) = detail::mean_std(aucs);
  return report;
}

inline std::string report_to_tsv(const EvalReport& report, const std::string& header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "split\tn_train\tn_test\tk\titerations\tconverged\tprecision\tauc\n";
  for (const auto& m : report.splits) {
    out << m.split << '\t' << m.n_train << '\t' << m.n_test << '\t' << m.chosen_k << '\t'
        << m.iterations << '\t' << (m.converged ? 1 : 0) << '\t'
        << (m.precision ? format_double(*m.precision) : "undefined") << '\t'
        << format_double(m.auc) << '\n';
  }
  out << "# mean_precision\t" << format_double(report.mean_precision) << "\tstd_precision\t"
      << format_double(report.std_precision) << "\tundefined\t" << report.n_undefined_precision
      << "\n";
  out << "# mean_auc\t" << format_double(report.mean_auc) << "\tstd_auc\t"
      << format_double(report.std_auc) << "\n";
  return out.str();
}

struct LambdaRow {
  double lambda = 0.0;
  std::vector<double> fold_aucs;
  double mean_auc = 0.0;
};

struct LambdaSelection {
  double best_lambda = 0.0;
  std::vector<LambdaRow> table;
};

// Stratified k-fold cross-validation over the given corpus: folds are
// fixed across the grid, each lambda is scored by mean validation AUC, and
// the best (first on ties) is returned with the full table.
inline LambdaSelection tune_lambda(const Corpus& corpus, const std::vector<double>& grid,
                                   const TrainConfig& config, std::uint64_t seed,
                                   int n_folds = 5) {
  if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
  for (double lam : grid) {
    if (lam < 0.0) throw std::invalid_argument("lambda values must be >= 0");
  }
  if (n_folds < 2) throw std::invalid_argument("n_folds must be >= 2");

  std::vector<int> pos;
  std::vector<int> neg;
  for (int i = 0; i < static_cast<int>(corpus.size()); ++i) {
    (corpus[i].label > 0 ? pos : neg).push_back(i);
  }
  if (static_cast<int>(pos.size()) < n_folds || static_cast<int>(neg.size()) < n_folds) {
    throw std::runtime_error(std::to_string(n_folds) +
                             "-fold tuning needs at least that many documents per class");
  }
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<std::vector<int>> folds(n_folds);
  for (std::size_t i = 0; i < pos.size(); ++i) folds[i % n_folds].push_back(pos[i]);
  for (std::size_t i = 0; i < neg.size(); ++i) folds[i % n_folds].push_back(neg[i]);
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());

  LambdaSelection sel;
  for (double lam : grid) {
    LambdaRow row;
    row.lambda = lam;
    for (int f = 0; f < n_folds; ++f) {
      std::vector<int> train_idx;
      for (int g = 0; g < n_folds; ++g) {
        if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
      }
      std::sort(train_idx.begin(), train_idx.end());
      TrainConfig cfg = config;
      cfg.lambda_theta = lam;
      cfg.seed = mix_seed(seed, static_cast<std::uint64_t>(f) + 1);
      try {
        const TrainedModel model = train_on_partition(corpus, train_idx, cfg);
        const Corpus valid_docs = detail::subset(corpus, folds[f]);
        const Eigen::VectorXd probs = predict_corpus(model, valid_docs);
        std::vector<double> score_list(probs.data(), probs.data() + probs.size());
        row.fold_aucs.push_back(roc_auc(score_list, corpus_labels(valid_docs)));
      } catch (const std::exception& e) {
        throw std::runtime_error("lambda " + format_double(lam) + ", fold " +
                                 std::to_string(f) + ": " + e.what());
      }
    }
    row.mean_auc = detail::mean_std(row.fold_aucs).first;
    sel.table.push_back(std::move(row));
  }
  sel.best_lambda = sel.table.front().lambda;
  double best = sel.table.front().mean_auc;
  for (const auto& row : sel.table) {
    if (row.mean_auc > best) {
      best = row.mean_auc;
      sel.best_lambda = row.lambda;
    }
  }
  return sel;
}

inline std::string lambda_table_to_tsv(const LambdaSelection& sel,
                                       const std::string& header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "lambda\tmean_auc\tfold_aucs\n";
  for (const auto& row : sel.table) {
    out << format_double(row.lambda) << '\t' << format_double(row.mean_auc) << '\t';
    for (std::size_t i = 0; i < row.fold_aucs.size(); ++i) {
      if (i) out << ',';
      out << format_double(row.fold_aucs[i]);
    }
    out << '\n';
  }
  out << "# best_lambda\t" << format_double(sel.best_lambda) << '\n';
  return out.str();
}

enum class NeighborDirection { nearest, farthest };

struct NeighborResult {
  std::string query;
  std::vector<std::pair<std::string, double>> ranked;
  NeighborDirection direction = NeighborDirection::nearest;
};

namespace detail {

inline int edit_distance(const std::string& a, const std::string& b) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  std::vector<int> prev(n + 1);
  std::vector<int> cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= n; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

}  // namespace detail

// Ranks all other vocabulary words by cosine similarity to the query's
// embedding column (columns are unit norm, so this is the dot product).
// Ties are broken by vocabulary order.
inline NeighborResult neighbors(const TrainedModel& model, const std::string& query, int top_n,
                                NeighborDirection direction) {
  if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");
  if (!model.vocab.contains(query)) {
    std::vector<std::pair<int, std::string>> close;
    for (const auto& word : model.vocab.words) {
      const int d = detail::edit_distance(word, query);
      if (d <= 2) close.emplace_back(d, word);
    }
    std::sort(close.begin(), close.end());
    if (close.size() > 5) close.resize(5);
    std::string msg = "word '" + query + "' is not in the model vocabulary";
    if (!close.empty()) {
      msg += "; near misses:";
      for (const auto& [d, w] : close) msg += " " + w;
    }
    throw std::runtime_error(msg);
  }
  const int q = model.vocab.at(query);
  const Eigen::VectorXd sims = model.embedding.w.transpose() * model.embedding.w.col(q);

  std::vector<int> order;
  order.reserve(model.vocab.size() - 1);
  for (int j = 0; j < model.vocab.size(); ++j) {
    if (j != q) order.push_back(j);
  }
  const bool nearest = direction == NeighborDirection::nearest;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return nearest ? sims(a) > sims(b) : sims(a) < sims(b);
  });
  if (static_cast<int>(order.size()) > top_n) order.resize(top_n);

  NeighborResult result;
  result.query = query;
  result.direction = direction;
  for (int j : order) result.ranked.emplace_back(model.vocab.words[j], sims(j));
  return result;
}

}  // namespace sentivec
