#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentivec/corpus.hpp"
#include "sentivec/io_util.hpp"
#include "sentivec/rng.hpp"

namespace sentivec {

// Tail energy fractions err(k) = (sum_{i>k} sigma_i^2) / (sum_i sigma_i^2)
// for k = 1..min(V,N); chosen_k is the smallest k with err(k) <= epsilon.
struct EffectiveRankCurve {
  std::vector<double> err;
  int chosen_k = 0;
  double epsilon = 0.0;

  double err_at(int k) const {
    if (k < 1 || k > static_cast<int>(err.size())) {
      throw std::out_of_range("rank " + std::to_string(k) + " outside spectrum range");
    }
    return err[k - 1];
  }
};

inline EffectiveRankCurve effective_rank(const Eigen::MatrixXd& phi, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(phi);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const int r = static_cast<int>(sigma.size());
  const double total = sigma.squaredNorm();
  if (!(total > 0.0)) throw std::runtime_error("matrix is zero; spectrum is undefined");

  EffectiveRankCurve curve;
  curve.epsilon = epsilon;
  curve.err.resize(r);
  // Suffix sums accumulated backwards so err(r) is exactly 0.
  double tail = 0.0;
  curve.err[r - 1] = 0.0;
  for (int k = r - 1; k >= 1; --k) {
    tail += sigma(k) * sigma(k);
    curve.err[k - 1] = tail / total;
  }
  curve.chosen_k = r;
  for (int k = 1; k <= r; ++k) {
    if (curve.err[k - 1] <= epsilon) {
      curve.chosen_k = k;
      break;
    }
  }
  return curve;
}

// Rescales every column to unit norm. `what` names the columns in errors.
inline Eigen::MatrixXd normalize_columns(const Eigen::MatrixXd& m,
                                         const std::vector<std::string>* names = nullptr) {
  Eigen::MatrixXd out = m;
  for (int j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      std::string who = names && j < static_cast<int>(names->size())
                            ? "'" + (*names)[j] + "'"
                            : "index " + std::to_string(j);
      throw std::runtime_error("cannot normalize zero/non-finite column for word " + who);
    }
    out.col(j) /= norm;
  }
  return out;
}

// Raw LSA word vectors before unit normalization: word j's vector is row j
// of U_k, optionally scaled by the singular values. Exposed separately so
// the rank-k reconstruction property can be checked on the unnormalized map.
inline Eigen::MatrixXd lsa_word_vectors(const Eigen::MatrixXd& phi, int k,
                                        bool scale_by_sigma = false) {
  if (k < 1) throw std::invalid_argument("embedding dimension must be >= 1");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(phi, Eigen::ComputeThinU);
  if (k > svd.singularValues().size()) {
    throw std::invalid_argument("embedding dimension " + std::to_string(k) +
                                " exceeds the matrix rank bound " +
                                std::to_string(svd.singularValues().size()));
  }
  Eigen::MatrixXd u = svd.matrixU().leftCols(k);
  // Fix the sign of each singular vector: largest-magnitude entry positive.
  for (int c = 0; c < k; ++c) {
    int arg = 0;
    u.col(c).cwiseAbs().maxCoeff(&arg);
    if (u(arg, c) < 0.0) u.col(c) = -u.col(c);
  }
  if (scale_by_sigma) {
    u = u * svd.singularValues().head(k).asDiagonal();
  }
  return u.transpose();  // k x V, column j = word j
}

// Unit-normalized LSA initializer for the embedding matrix.
inline Eigen::MatrixXd lsa_init(const Eigen::MatrixXd& phi, int k,
                                const std::vector<std::string>* words = nullptr,
                                bool scale_by_sigma = false) {
  return normalize_columns(lsa_word_vectors(phi, k, scale_by_sigma), words);
}

// k x V matrix of independent random unit columns.
inline Eigen::MatrixXd random_unit_columns(int k, int v, Rng& rng) {
  if (k < 1 || v < 1) throw std::invalid_argument("matrix dimensions must be positive");
  Eigen::MatrixXd m(k, v);
  for (int j = 0; j < v; ++j) {
    double norm = 0.0;
    do {
      for (int r = 0; r < k; ++r) m(r, j) = rng.normal();
      norm = m.col(j).norm();
    } while (!(norm > 1e-12));
    m.col(j) /= norm;
  }
  return m;
}

// Text embeddings: header `V k`, then one `word v1 .. vk` line per word.
inline std::string embeddings_to_text(const Eigen::MatrixXd& w,
                                      const std::vector<std::string>& words) {
  if (static_cast<int>(words.size()) != w.cols()) {
    throw std::invalid_argument("word list length does not match embedding columns");
  }
  std::ostringstream out;
  out << w.cols() << ' ' << w.rows() << '\n';
  for (int j = 0; j < w.cols(); ++j) {
    out << words[j];
    for (int r = 0; r < w.rows(); ++r) out << ' ' << format_double(w(r, j));
    out << '\n';
  }
  return out.str();
}

inline void write_embeddings(const std::filesystem::path& path, const Eigen::MatrixXd& w,
                             const std::vector<std::string>& words) {
  atomic_write_file(path, embeddings_to_text(w, words));
}

// Loads embeddings and aligns them to `vocab`. File vectors are projected
// to unit norm; extra words in the file are ignored; vocabulary words
// missing from the file get seeded random unit vectors. Column order
// always follows the vocabulary. Dimension conflicts and malformed lines
// report the 1-based line number.
inline Eigen::MatrixXd import_embeddings(const std::string& content, const Vocabulary& vocab,
                                         int expected_k, std::uint64_t seed,
                                         int* n_missing_out = nullptr) {
  const auto lines = split_lines(content);
  if (lines.empty()) throw std::runtime_error("embedding text is empty");
  std::istringstream header(lines[0]);
  long file_v = 0;
  long file_k = 0;
  if (!(header >> file_v >> file_k) || file_v < 0 || file_k < 1) {
    throw std::runtime_error("line 1: expected header `num_words dimension`");
  }
  if (expected_k > 0 && file_k != expected_k) {
    throw std::runtime_error("embedding dimension " + std::to_string(file_k) +
                             " does not match the requested dimension " +
                             std::to_string(expected_k));
  }
  const int k = static_cast<int>(file_k);
  Rng rng(seed);
  Eigen::MatrixXd w = random_unit_columns(k, vocab.size(), rng);
  std::vector<bool> found(vocab.words.size(), false);

  int parsed = 0;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    std::istringstream row(lines[ln]);
    std::string word;
    row >> word;
    Eigen::VectorXd vec(k);
    for (int r = 0; r < k; ++r) {
      if (!(row >> vec(r))) {
        throw std::runtime_error("line " + std::to_string(ln + 1) + ": expected " +
                                 std::to_string(k) + " values after the word");
      }
    }
    double extra;
    if (row >> extra) {
      throw std::runtime_error("line " + std::to_string(ln + 1) + ": more than " +
                               std::to_string(k) + " values after the word");
    }
    ++parsed;
    auto it = vocab.index.find(word);
    if (it == vocab.index.end()) continue;
    const double norm = vec.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::runtime_error("line " + std::to_string(ln + 1) + ": vector for '" + word +
                               "' has zero or non-finite norm");
    }
    w.col(it->second) = vec / norm;
    found[it->second] = true;
  }
  if (parsed != file_v) {
    throw std::runtime_error("header promises " + std::to_string(file_v) +
                             " words but the file holds " + std::to_string(parsed));
  }
  if (n_missing_out) {
    *n_missing_out = static_cast<int>(std::count(found.begin(), found.end(), false));
  }
  return w;
}

inline Eigen::MatrixXd read_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                       int expected_k, std::uint64_t seed,
                                       int* n_missing_out = nullptr) {
  try {
    return import_embeddings(read_file(path), vocab, expected_k, seed, n_missing_out);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace sentivec
