#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace enrich {

class Corpus;

enum class Weighting { Count, Binary };

// Word n-grams over comment text, or character n-grams over a padded name.
enum class Analyzer { Word, Char };

struct FeatureConfig {
  int n_min = 1;
  int n_max = 3;
  int min_df = 2;
  bool lowercase = true;
  Weighting weighting = Weighting::Count;
  Analyzer analyzer = Analyzer::Word;

  void check() const;
  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

nlohmann::json to_json(const FeatureConfig& cfg);
FeatureConfig feature_config_from_json(const nlohmann::json& j);

// Sorted (index, weight) pairs in a space of dimension `dim`.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::size_t dim = 0;

  std::size_t nnz() const { return indices.size(); }
  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

struct SparseMatrix {
  std::vector<SparseVector> rows;
  std::size_t dim = 0;

  std::size_t size() const { return rows.size(); }
};

std::vector<std::string> extract_ngrams(std::span<const std::string> tokens, int n_min, int n_max);

// Number of n-grams extract_ngrams yields for `token_count` tokens.
std::size_t ngram_count(std::size_t token_count, int n_min, int n_max);

// All features of one document under `cfg` (tokens or characters, then n-grams).
std::vector<std::string> analyze(std::string_view text, const FeatureConfig& cfg);

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> doc_freq, FeatureConfig cfg);

  std::size_t size() const { return terms_.size(); }
  const FeatureConfig& config() const { return config_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::uint32_t>& doc_freq() const { return doc_freq_; }

  // Feature index, or -1 when unknown.
  std::int64_t index_of(std::string_view ngram) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.terms_ == b.terms_ && a.doc_freq_ == b.doc_freq_ && a.config_ == b.config_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> doc_freq_;
  FeatureConfig config_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Terms with document frequency >= min_df, indexed in lexicographic order.
// Throws ValidationError("empty vocabulary") when nothing survives.
Vocabulary build_vocab(std::span<const std::string> texts, const FeatureConfig& cfg);
Vocabulary build_vocab(const Corpus& corpus, const FeatureConfig& cfg);

SparseVector vectorize(std::string_view text, const Vocabulary& vocab);
SparseMatrix vectorize_all(std::span<const std::string> texts, const Vocabulary& vocab);

}  // namespace enrich
