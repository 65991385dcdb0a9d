#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sentivec/io_util.hpp"
#include "sentivec/rng.hpp"

namespace sentivec {

// One labeled document; label is +1 or -1.
struct LabeledDocument {
  std::string text;
  int label = 0;
};

using Corpus = std::vector<LabeledDocument>;

inline std::vector<int> corpus_labels(const Corpus& corpus) {
  std::vector<int> labels;
  labels.reserve(corpus.size());
  for (const auto& doc : corpus) labels.push_back(doc.label);
  return labels;
}

// Lowercases and splits on every non-alphanumeric character (ASCII).
// Bytes outside [0-9A-Za-z] act as separators, so punctuation, whitespace
// and multi-byte UTF-8 sequences all delimit tokens.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (c >= 'a' && c <= 'z') {
      current.push_back(static_cast<char>(c));
    } else if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (c >= '0' && c <= '9') {
      current.push_back(static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// Distinct tokens in first-occurrence order; index maps token -> column.
struct Vocabulary {
  std::vector<std::string> words;
  std::unordered_map<std::string, int> index;

  int size() const { return static_cast<int>(words.size()); }
  bool contains(const std::string& word) const { return index.count(word) > 0; }

  int at(const std::string& word) const {
    auto it = index.find(word);
    if (it == index.end()) {
      throw std::out_of_range("word not in vocabulary: " + word);
    }
    return it->second;
  }

  void add(const std::string& word) {
    if (index.emplace(word, static_cast<int>(words.size())).second) {
      words.push_back(word);
    }
  }
};

// Every distinct token from every document is retained; no frequency cutoff.
inline Vocabulary build_vocabulary(const Corpus& corpus) {
  Vocabulary vocab;
  for (const auto& doc : corpus) {
    for (auto& token : tokenize(doc.text)) vocab.add(token);
  }
  if (vocab.words.empty()) {
    throw std::runtime_error("corpus contains no tokens; cannot build a vocabulary");
  }
  return vocab;
}

enum class TermWeighting { tf, tf_idf };

inline std::string to_string(TermWeighting w) {
  return w == TermWeighting::tf ? "tf" : "tfidf";
}

inline TermWeighting term_weighting_from_string(const std::string& s) {
  if (s == "tf") return TermWeighting::tf;
  if (s == "tfidf" || s == "tf-idf" || s == "tf_idf") return TermWeighting::tf_idf;
  throw std::invalid_argument("unknown weighting '" + s + "' (expected tf or tfidf)");
}

// V x N matrix of document word-weights; column i holds phi_i.
// idf stores ln(N/df_j) when weighting == tf_idf (0 for words with df = 0,
// whose rows are all-zero anyway) and is empty under plain tf.
struct DocTermMatrix {
  Eigen::MatrixXd entries;
  TermWeighting weighting = TermWeighting::tf;
  Eigen::VectorXd idf;

  int vocab_size() const { return static_cast<int>(entries.rows()); }
  int n_docs() const { return static_cast<int>(entries.cols()); }
};

namespace detail {

inline Eigen::MatrixXd count_terms(const Corpus& corpus, const Vocabulary& vocab,
                                   bool allow_unknown_tokens) {
  const int v = vocab.size();
  const int n = static_cast<int>(corpus.size());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(v, n);
  for (int i = 0; i < n; ++i) {
    for (const auto& token : tokenize(corpus[i].text)) {
      auto it = vocab.index.find(token);
      if (it != vocab.index.end()) {
        counts(it->second, i) += 1.0;
      } else if (!allow_unknown_tokens) {
        throw std::runtime_error("token '" + token + "' in document " +
                                 std::to_string(i) + " is not in the vocabulary");
      }
    }
  }
  return counts;
}

inline Eigen::VectorXd idf_from_counts(const Eigen::MatrixXd& counts) {
  const int v = static_cast<int>(counts.rows());
  const double n = static_cast<double>(counts.cols());
  Eigen::VectorXd idf(v);
  for (int j = 0; j < v; ++j) {
    const int df = static_cast<int>((counts.row(j).array() > 0.0).count());
    idf(j) = df > 0 ? std::log(n / df) : 0.0;
  }
  return idf;
}

}  // namespace detail

// Builds the weight matrix for a training corpus. Under tf, entry (j,i) is
// the count of word j in document i; under tf-idf it is tf * ln(N/df_j)
// with document frequencies taken from this corpus. A document whose
// column ends up all-zero is rejected.
inline DocTermMatrix build_term_matrix(const Corpus& corpus, const Vocabulary& vocab,
                                       TermWeighting weighting) {
  if (corpus.empty()) throw std::runtime_error("cannot build a term matrix from an empty corpus");
  DocTermMatrix m;
  m.weighting = weighting;
  m.entries = detail::count_terms(corpus, vocab, /*allow_unknown_tokens=*/false);
  if (weighting == TermWeighting::tf_idf) {
    m.idf = detail::idf_from_counts(m.entries);
    m.entries = m.idf.asDiagonal() * m.entries;
  }
  for (int i = 0; i < m.n_docs(); ++i) {
    if (m.entries.col(i).maxCoeff() <= 0.0) {
      throw std::runtime_error(
          "document " + std::to_string(i) + " (\"" + corpus[i].text.substr(0, 40) +
          "\") has an all-zero weight column");
    }
  }
  return m;
}

// Weighs documents against a fixed vocabulary, e.g. test documents against
// training-side statistics. Out-of-vocabulary tokens are dropped and
// all-zero columns are permitted; under tf-idf the supplied (training) idf
// is applied.
inline Eigen::MatrixXd weight_documents(const Corpus& corpus, const Vocabulary& vocab,
                                        TermWeighting weighting,
                                        const Eigen::VectorXd& idf) {
  Eigen::MatrixXd counts = detail::count_terms(corpus, vocab, /*allow_unknown_tokens=*/true);
  if (weighting == TermWeighting::tf_idf) {
    if (idf.size() != counts.rows()) {
      throw std::invalid_argument("idf length does not match vocabulary size");
    }
    counts = idf.asDiagonal() * counts;
  }
  return counts;
}

// Misclassification costs c_plus = n_minus/N, c_minus = n_plus/N.
struct ClassCosts {
  double c_plus = 0.0;
  double c_minus = 0.0;
  int n_plus = 0;
  int n_minus = 0;

  double of_label(int label) const { return label > 0 ? c_plus : c_minus; }
};

inline ClassCosts class_costs(const std::vector<int>& labels) {
  int n_plus = 0;
  int n_minus = 0;
  for (int y : labels) {
    if (y == 1) {
      ++n_plus;
    } else if (y == -1) {
      ++n_minus;
    } else {
      throw std::invalid_argument("label must be +1 or -1, got " + std::to_string(y));
    }
  }
  if (n_plus == 0 || n_minus == 0) {
    throw std::runtime_error("both classes must be present to derive class costs");
  }
  const double n = static_cast<double>(n_plus + n_minus);
  return ClassCosts{n_minus / n, n_plus / n, n_plus, n_minus};
}

struct SplitPair {
  std::vector<int> train;
  std::vector<int> test;
};

struct SplitSet {
  std::vector<SplitPair> pairs;
  std::uint64_t seed = 0;
  int n_splits = 0;
};

// n_splits independent stratified shuffles. Per-class test counts are
// rounded, which keeps each partition's class ratio within one document of
// the corpus ratio.
inline SplitSet stratified_splits(const std::vector<int>& labels, int n_splits,
                                  double test_fraction, std::uint64_t seed) {
  if (n_splits < 1) throw std::invalid_argument("n_splits must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  }
  std::vector<int> pos;
  std::vector<int> neg;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    (labels[i] > 0 ? pos : neg).push_back(i);
  }
  if (pos.size() < 2 || neg.size() < 2) {
    throw std::runtime_error("stratified splits need at least 2 documents per class");
  }
  const auto take = [&](std::size_t n_class) {
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n_class)));
    if (n_test == 0 || n_test >= n_class) {
      throw std::runtime_error("test_fraction " + format_double(test_fraction) +
                               " leaves an empty class partition");
    }
    return n_test;
  };
  const std::size_t test_pos = take(pos.size());
  const std::size_t test_neg = take(neg.size());

  SplitSet set;
  set.seed = seed;
  set.n_splits = n_splits;
  Rng rng(seed);
  for (int s = 0; s < n_splits; ++s) {
    std::vector<int> p = pos;
    std::vector<int> ng = neg;
    rng.shuffle(p);
    rng.shuffle(ng);
    SplitPair pair;
    pair.test.assign(p.begin(), p.begin() + test_pos);
    pair.test.insert(pair.test.end(), ng.begin(), ng.begin() + test_neg);
    pair.train.assign(p.begin() + test_pos, p.end());
    pair.train.insert(pair.train.end(), ng.begin() + test_neg, ng.end());
    std::sort(pair.test.begin(), pair.test.end());
    std::sort(pair.train.begin(), pair.train.end());
    set.pairs.push_back(std::move(pair));
  }
  return set;
}

inline SplitSet stratified_splits(const Corpus& corpus, int n_splits,
                                  double test_fraction, std::uint64_t seed) {
  return stratified_splits(corpus_labels(corpus), n_splits, test_fraction, seed);
}

// Maps corpus-file label strings onto {+1, -1}. When no explicit mapping is
// given, "1"/"+1" and "0"/"-1" are recognized.
struct LabelMapping {
  std::string positive;
  std::string negative;
};

inline int parse_label(const std::string& field,
                       const std::optional<LabelMapping>& mapping) {
  if (mapping) {
    if (field == mapping->positive) return 1;
    if (field == mapping->negative) return -1;
    throw std::runtime_error("label '" + field + "' matches neither '" +
                             mapping->positive + "' nor '" + mapping->negative + "'");
  }
  if (field == "1" || field == "+1") return 1;
  if (field == "0" || field == "-1") return -1;
  throw std::runtime_error("unrecognized label '" + field +
                           "' (expected 1/0 or +1/-1, or pass an explicit mapping)");
}

// Corpus file format: UTF-8 TSV, one `label<TAB>text` per line; lines
// starting with '#' are comments. Documents with no tokens are rejected.
inline Corpus parse_corpus_tsv(const std::string& content,
                               const std::optional<LabelMapping>& mapping = std::nullopt) {
  Corpus corpus;
  const auto lines = split_lines(content);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("line " + std::to_string(ln + 1) +
                               ": expected `label<TAB>text`");
    }
    LabeledDocument doc;
    try {
      doc.label = parse_label(line.substr(0, tab), mapping);
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(ln + 1) + ": " + e.what());
    }
    doc.text = line.substr(tab + 1);
    if (tokenize(doc.text).empty()) {
      throw std::runtime_error("line " + std::to_string(ln + 1) +
                               ": document is empty after tokenization");
    }
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

inline Corpus read_corpus_tsv(const std::filesystem::path& path,
                              const std::optional<LabelMapping>& mapping = std::nullopt) {
  try {
    return parse_corpus_tsv(read_file(path), mapping);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

inline std::string corpus_to_tsv(const Corpus& corpus,
                                 const std::string& header_comment = "") {
  std::ostringstream out;
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  for (const auto& doc : corpus) {
    out << (doc.label > 0 ? "+1" : "-1") << '\t' << doc.text << '\n';
  }
  return out.str();
}

inline void write_corpus_tsv(const std::filesystem::path& path, const Corpus& corpus,
                             const std::string& header_comment = "") {
  atomic_write_file(path, corpus_to_tsv(corpus, header_comment));
}

}  // namespace sentivec
