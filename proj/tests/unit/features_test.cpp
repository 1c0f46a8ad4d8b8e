#include <doctest.h>

#include <random>
#include <set>

#include "enrich/error.hpp"
#include "enrich/features.hpp"
#include "enrich/text.hpp"

using namespace enrich;
using Strings = std::vector<std::string>;

namespace {

FeatureConfig cfg(int n_min, int n_max, int min_df, Weighting w = Weighting::Count) {
  FeatureConfig c;
  c.n_min = n_min;
  c.n_max = n_max;
  c.min_df = min_df;
  c.weighting = w;
  return c;
}

}  // namespace

TEST_CASE("extract_ngrams examples") {
  CHECK(extract_ngrams(Strings{"a", "b", "c"}, 1, 2) == Strings{"a", "b", "c", "a b", "b c"});
  CHECK(extract_ngrams(Strings{"a"}, 1, 3) == Strings{"a"});
  CHECK(extract_ngrams(Strings{}, 1, 3).empty());
  CHECK(extract_ngrams(Strings{"a", "b", "c"}, 2, 3) == Strings{"a b", "b c", "a b c"});
  CHECK_THROWS_AS(extract_ngrams(Strings{"a"}, 2, 1), ValidationError);
}

TEST_CASE("property: n-gram count matches the closed form") {
  std::mt19937_64 rng(3);
  const Strings words = {"free", "college", "now", "don't", "http://x.y", "Éé", "!!"};
  for (int trial = 0; trial < 500; ++trial) {
    std::string doc;
    for (std::size_t w = rng() % 15; w > 0; --w) doc += words[rng() % words.size()] + " ";
    const int n_min = 1 + static_cast<int>(rng() % 3);
    const int n_max = n_min + static_cast<int>(rng() % 3);
    const auto tokens = text::tokenize(doc);
    const std::size_t t = tokens.size();
    std::size_t expected = 0;
    for (int n = n_min; n <= n_max; ++n) expected += t + 1 > static_cast<std::size_t>(n) ? t - n + 1 : 0;
    CHECK(extract_ngrams(tokens, n_min, n_max).size() == expected);
    CHECK(ngram_count(t, n_min, n_max) == expected);
  }
}

TEST_CASE("build_vocab: df threshold, lexicographic order, empty vocabulary") {
  Strings docs = {"free college", "free tuition", "rare word"};
  auto v = build_vocab(docs, cfg(1, 1, 2));
  CHECK(v.terms() == Strings{"free"});
  CHECK(v.index_of("rare") == -1);

  auto v2 = build_vocab(Strings{"a b", "b c"}, cfg(1, 2, 1));
  CHECK(v2.terms() == Strings{"a", "a b", "b", "b c", "c"});
  for (std::size_t i = 0; i < v2.size(); ++i) CHECK(v2.index_of(v2.terms()[i]) == static_cast<std::int64_t>(i));
  CHECK(v2.doc_freq() == std::vector<std::uint32_t>{1, 1, 2, 1, 1});

  CHECK_THROWS_WITH_AS(build_vocab(Strings{"only once", "never twice"}, cfg(1, 1, 2)), "empty vocabulary",
                       ValidationError);
  CHECK(build_vocab(docs, cfg(1, 3, 1)) == build_vocab(docs, cfg(1, 3, 1)));
}

TEST_CASE("vectorize: counts, binary weights, unknown n-grams") {
  Vocabulary vocab({"college", "free"}, {1, 1}, cfg(1, 1, 1));
  auto v = vectorize("free free college", vocab);
  CHECK(v.indices == std::vector<std::uint32_t>{0, 1});
  CHECK(v.values == std::vector<double>{1, 2});
  CHECK(v.dim == 2);

  Vocabulary bin({"college", "free"}, {1, 1}, cfg(1, 1, 1, Weighting::Binary));
  CHECK(vectorize("free free college", bin).values == std::vector<double>{1, 1});
  CHECK(vectorize("nothing known here", vocab).nnz() == 0);
}

TEST_CASE("property: vectors are sorted, in range, positive and pure") {
  std::mt19937_64 rng(9);
  const Strings words = {"free", "college", "now", "pay", "tax", "loan", "the"};
  Strings docs;
  for (int d = 0; d < 40; ++d) {
    std::string doc;
    for (std::size_t w = 1 + rng() % 10; w > 0; --w) doc += words[rng() % words.size()] + " ";
    docs.push_back(doc);
  }
  auto vocab = build_vocab(docs, cfg(1, 3, 2));
  std::set<std::int64_t> seen;
  for (const auto& t : vocab.terms()) seen.insert(vocab.index_of(t));
  CHECK(seen.size() == vocab.size());
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == static_cast<std::int64_t>(vocab.size()) - 1);
  for (auto df : vocab.doc_freq()) CHECK(df >= 2);
  for (const auto& doc : docs) {
    auto v = vectorize(doc, vocab);
    CHECK(v == vectorize(doc, vocab));
    for (std::size_t i = 0; i < v.nnz(); ++i) {
      CHECK(v.indices[i] < vocab.size());
      CHECK(v.values[i] > 0);
      if (i > 0) CHECK(v.indices[i - 1] < v.indices[i]);
    }
  }
}

TEST_CASE("character analyzer pads each name token") {
  FeatureConfig c;
  c.analyzer = Analyzer::Char;
  c.n_min = 2;
  c.n_max = 2;
  c.min_df = 1;
  CHECK(analyze("Ab", c) == Strings{"^a", "ab", "b$"});
}

TEST_CASE("feature config validation and JSON round-trip") {
  CHECK_THROWS_AS(cfg(2, 1, 1).check(), ValidationError);
  CHECK_THROWS_AS(cfg(1, 1, 0).check(), ValidationError);
  FeatureConfig c = cfg(1, 2, 3, Weighting::Binary);
  c.analyzer = Analyzer::Char;
  CHECK(feature_config_from_json(to_json(c)) == c);
}
