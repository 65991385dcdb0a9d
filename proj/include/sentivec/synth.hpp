#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentivec/corpus.hpp"
#include "sentivec/rng.hpp"

namespace sentivec {

// Polarized-corpus generator settings. Each document is labeled by
// construction: at least `polarity_threshold` of its tokens come from its
// label's polarity word list, the rest from the neutral list.
struct SynthConfig {
  int n_docs = 400;
  int n_pos_words = 15;
  int n_neg_words = 15;
  int n_neutral_words = 10;
  double positive_doc_fraction = 0.10;
  double polarity_threshold = 0.70;
  int min_doc_len = 8;
  int max_doc_len = 20;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_docs < 2) throw std::invalid_argument("n_docs must be >= 2");
    if (n_pos_words < 1 || n_neg_words < 1 || n_neutral_words < 0) {
      throw std::invalid_argument("word-class sizes must be positive (neutral may be 0)");
    }
    if (!(positive_doc_fraction > 0.0 && positive_doc_fraction < 1.0)) {
      throw std::invalid_argument("positive_doc_fraction must lie in (0, 1)");
    }
    if (!(polarity_threshold > 0.5 && polarity_threshold <= 1.0)) {
      throw std::invalid_argument("polarity_threshold must lie in (0.5, 1]");
    }
    if (min_doc_len < 1 || max_doc_len < min_doc_len) {
      throw std::invalid_argument("document length range is invalid");
    }
  }
};

namespace detail {

inline std::vector<std::string> numbered_words(const char* stem, int count) {
  std::vector<std::string> words;
  words.reserve(count);
  char buf[32];
  for (int i = 1; i <= count; ++i) {
    std::snprintf(buf, sizeof(buf), "%s%02d", stem, i);
    words.emplace_back(buf);
  }
  return words;
}

}  // namespace detail

struct SynthWordLists {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
  std::vector<std::string> neutral;
};

inline SynthWordLists synth_word_lists(const SynthConfig& config) {
  return SynthWordLists{detail::numbered_words("pos", config.n_pos_words),
                        detail::numbered_words("neg", config.n_neg_words),
                        detail::numbered_words("neu", config.n_neutral_words)};
}

// Builds round(n_docs * positive_doc_fraction) positive documents and the
// rest negative. Per document: length L ~ U{min,max}, polar fraction
// p ~ U[threshold, 1], ceil(pL) tokens from the polarity list, the rest
// neutral, token order shuffled. A final deterministic pass swaps single
// tokens so that every synthetic word occurs at least once, taking
// replacements from documents where the outgoing word is duplicated (never
// disturbing the threshold rule, since swaps stay within a word class).
inline Corpus generate_synthetic(const SynthConfig& config) {
  config.validate();
  const SynthWordLists lists = synth_word_lists(config);

  const int n_pos_docs =
      static_cast<int>(std::llround(config.positive_doc_fraction * config.n_docs));
  if (n_pos_docs < 1 || n_pos_docs >= config.n_docs) {
    throw std::invalid_argument("positive_doc_fraction leaves a class empty");
  }

  Rng rng(config.seed);
  std::vector<std::vector<std::string>> token_lists(config.n_docs);
  std::vector<int> labels(config.n_docs);

  for (int d = 0; d < config.n_docs; ++d) {
    const bool positive = d < n_pos_docs;
    labels[d] = positive ? 1 : -1;
    const auto& polar = positive ? lists.positive : lists.negative;

    const int len = static_cast<int>(rng.uniform_int(config.min_doc_len, config.max_doc_len));
    const double p = rng.uniform(config.polarity_threshold, 1.0);
    int n_polar = static_cast<int>(std::ceil(p * len));
    if (n_polar > len) n_polar = len;
    if (lists.neutral.empty()) n_polar = len;

    auto& tokens = token_lists[d];
    tokens.reserve(len);
    for (int t = 0; t < n_polar; ++t) {
      tokens.push_back(polar[rng.below(polar.size())]);
    }
    for (int t = n_polar; t < len; ++t) {
      tokens.push_back(lists.neutral[rng.below(lists.neutral.size())]);
    }
    rng.shuffle(tokens);
  }

  // Coverage fix-up. Count occurrences, then for each unseen word scan the
  // corpus in order for a same-class token whose word occurs at least
  // twice and replace that one occurrence.
  std::unordered_map<std::string, int> count;
  for (const auto& tokens : token_lists) {
    for (const auto& token : tokens) ++count[token];
  }
  const auto ensure_used = [&](const std::vector<std::string>& word_class, bool neutral_class) {
    for (const auto& word : word_class) {
      if (count[word] > 0) continue;
      const std::string stem = word.substr(0, 3);
      bool placed = false;
      for (int d = 0; d < config.n_docs && !placed; ++d) {
        // Neutral words may enter any document; polar words only documents
        // of their own label.
        if (!neutral_class) {
          const bool word_positive = stem == "pos";
          if ((labels[d] > 0) != word_positive) continue;
        }
        for (auto& token : token_lists[d]) {
          if (token.compare(0, 3, stem) == 0 && count[token] >= 2) {
            --count[token];
            token = word;
            ++count[word];
            placed = true;
            break;
          }
        }
      }
      if (!placed) {
        throw std::runtime_error("could not place synthetic word '" + word +
                                 "'; corpus too small for the vocabulary");
      }
    }
  };
  ensure_used(lists.positive, false);
  ensure_used(lists.negative, false);
  // With polarity_threshold = 1 no document has neutral slots, so neutral
  // coverage is only enforceable when neutral tokens exist at all.
  long n_neutral_tokens = 0;
  for (const auto& word : lists.neutral) n_neutral_tokens += count[word];
  if (n_neutral_tokens > 0) ensure_used(lists.neutral, true);

  std::vector<int> order(config.n_docs);
  for (int i = 0; i < config.n_docs; ++i) order[i] = i;
  rng.shuffle(order);

  Corpus corpus;
  corpus.reserve(config.n_docs);
  for (int idx : order) {
    LabeledDocument doc;
    doc.label = labels[idx];
    std::string text;
    for (const auto& token : token_lists[idx]) {
      if (!text.empty()) text.push_back(' ');
      text += token;
    }
    doc.text = std::move(text);
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace sentivec
