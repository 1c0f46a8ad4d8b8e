#include "enrich/features.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "enrich/corpus.hpp"
#include "enrich/error.hpp"
#include "enrich/text.hpp"

namespace enrich {

using nlohmann::json;

void FeatureConfig::check() const {
  if (n_min < 1 || n_max < n_min) {
    throw ValidationError("feature config needs 1 <= n_min <= n_max, got " + std::to_string(n_min) + ".." +
                          std::to_string(n_max));
  }
  if (min_df < 1) throw ValidationError("min_df must be >= 1");
}

json to_json(const FeatureConfig& cfg) {
  return {{"n_min", cfg.n_min},
          {"n_max", cfg.n_max},
          {"min_df", cfg.min_df},
          {"lowercase", cfg.lowercase},
          {"weighting", cfg.weighting == Weighting::Count ? "count" : "binary"},
          {"analyzer", cfg.analyzer == Analyzer::Word ? "word" : "char"}};
}

FeatureConfig feature_config_from_json(const json& j) {
  FeatureConfig cfg;
  cfg.n_min = j.value("n_min", cfg.n_min);
  cfg.n_max = j.value("n_max", cfg.n_max);
  cfg.min_df = j.value("min_df", cfg.min_df);
  cfg.lowercase = j.value("lowercase", cfg.lowercase);
  const std::string w = j.value("weighting", std::string("count"));
  if (w == "count") {
    cfg.weighting = Weighting::Count;
  } else if (w == "binary") {
    cfg.weighting = Weighting::Binary;
  } else {
    throw ParseError("unknown weighting: " + w);
  }
  const std::string a = j.value("analyzer", std::string("word"));
  if (a == "word") {
    cfg.analyzer = Analyzer::Word;
  } else if (a == "char") {
    cfg.analyzer = Analyzer::Char;
  } else {
    throw ParseError("unknown analyzer: " + a);
  }
  cfg.check();
  return cfg;
}

std::vector<std::string> extract_ngrams(std::span<const std::string> tokens, int n_min, int n_max) {
  std::vector<std::string> out;
  if (n_min < 1 || n_max < n_min) throw ValidationError("extract_ngrams needs 1 <= n_min <= n_max");
  out.reserve(ngram_count(tokens.size(), n_min, n_max));
  for (int n = n_min; n <= n_max; ++n) {
    const auto len = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (std::size_t k = 1; k < len; ++k) {
        g.push_back(' ');
        g += tokens[i + k];
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

std::size_t ngram_count(std::size_t token_count, int n_min, int n_max) {
  std::size_t total = 0;
  for (int n = n_min; n <= n_max; ++n) {
    const auto len = static_cast<std::size_t>(n);
    if (token_count >= len) total += token_count - len + 1;
  }
  return total;
}

namespace {

// Character n-grams of each name token padded as "^token$"; no n-gram spans
// two tokens.
std::vector<std::string> char_ngrams(std::string_view text, const FeatureConfig& cfg) {
  std::string norm = cfg.lowercase ? text::normalize_name(text) : text::nfc(text);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= norm.size()) {
    auto sp = norm.find(' ', start);
    std::string_view word(norm.data() + start, (sp == std::string::npos ? norm.size() : sp) - start);
    if (!word.empty()) {
      std::vector<std::string> cps{"^"};
      for (auto& cp : text::code_points(word)) cps.push_back(std::move(cp));
      cps.emplace_back("$");
      for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
        const auto len = static_cast<std::size_t>(n);
        for (std::size_t i = 0; i + len <= cps.size(); ++i) {
          std::string g;
          for (std::size_t k = 0; k < len; ++k) g += cps[i + k];
          out.push_back(std::move(g));
        }
      }
    }
    if (sp == std::string::npos) break;
    start = sp + 1;
  }
  return out;
}

}  // namespace

std::vector<std::string> analyze(std::string_view text, const FeatureConfig& cfg) {
  if (cfg.analyzer == Analyzer::Char) return char_ngrams(text, cfg);
  auto tokens = text::tokenize(text, {.lowercase = cfg.lowercase});
  return extract_ngrams(tokens, cfg.n_min, cfg.n_max);
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> doc_freq, FeatureConfig cfg)
    : terms_(std::move(terms)), doc_freq_(std::move(doc_freq)), config_(cfg) {
  if (doc_freq_.size() != terms_.size()) throw ValidationError("vocabulary df size mismatch");
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], static_cast<std::uint32_t>(i)).second) {
      throw ValidationError("duplicate vocabulary term: " + terms_[i]);
    }
  }
}

std::int64_t Vocabulary::index_of(std::string_view ngram) const {
  auto it = index_.find(std::string(ngram));
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

Vocabulary build_vocab(std::span<const std::string> texts, const FeatureConfig& cfg) {
  cfg.check();
  if (texts.empty()) throw ValidationError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::uint32_t> df;  // ordered: lexicographic feature order
  for (const auto& t : texts) {
    auto grams = analyze(t, cfg);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++df[std::move(g)];
  }
  std::vector<std::string> terms;
  std::vector<std::uint32_t> freq;
  for (auto& [g, n] : df) {
    if (n >= static_cast<std::uint32_t>(cfg.min_df)) {
      terms.push_back(g);
      freq.push_back(n);
    }
  }
  if (terms.empty()) throw ValidationError("empty vocabulary");
  return Vocabulary(std::move(terms), std::move(freq), cfg);
}

Vocabulary build_vocab(const Corpus& corpus, const FeatureConfig& cfg) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& r : corpus.records) texts.push_back(r.text);
  return build_vocab(texts, cfg);
}

SparseVector vectorize(std::string_view text, const Vocabulary& vocab) {
  std::map<std::uint32_t, double> counts;
  for (const auto& g : analyze(text, vocab.config())) {
    auto idx = vocab.index_of(g);
    if (idx >= 0) counts[static_cast<std::uint32_t>(idx)] += 1.0;
  }
  SparseVector v;
  v.dim = vocab.size();
  v.indices.reserve(counts.size());
  v.values.reserve(counts.size());
  const bool binary = vocab.config().weighting == Weighting::Binary;
  for (const auto& [i, c] : counts) {
    v.indices.push_back(i);
    v.values.push_back(binary ? 1.0 : c);
  }
  return v;
}

SparseMatrix vectorize_all(std::span<const std::string> texts, const Vocabulary& vocab) {
  SparseMatrix m;
  m.dim = vocab.size();
  m.rows.reserve(texts.size());
  for (const auto& t : texts) m.rows.push_back(vectorize(t, vocab));
  return m;
}

}  // namespace enrich
