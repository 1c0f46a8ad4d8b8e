#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "enrich/error.hpp"
#include "enrich/evaluation.hpp"
#include "support.hpp"

using namespace enrich;
using Strings = std::vector<std::string>;

namespace {

FeatureConfig small_features() {
  FeatureConfig f;
  f.min_df = 1;
  return f;
}

CVConfig cv_config(int k, std::uint64_t seed, std::vector<double> lambdas = {0.01, 0.1, 1, 10}) {
  CVConfig cv;
  cv.k = k;
  cv.seed = seed;
  cv.grid = grid_from_lambdas(lambdas);
  return cv;
}

double accuracy(const Strings& gold, const Strings& pred) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) same += gold[i] == pred[i];
  return static_cast<double>(same) / static_cast<double>(gold.size());
}

}  // namespace

TEST_CASE("stratified_kfold examples") {
  Strings ten(10, "A");
  auto loo = stratified_kfold(ten, 10, 1);
  REQUIRE(loo.size() == 10);
  for (const auto& f : loo) CHECK(f.size() == 1);

  Strings y = {"A", "A", "A", "A", "A", "A", "B", "B", "B", "B"};
  auto folds = stratified_kfold(y, 5, 42);
  REQUIRE(folds.size() == 5);
  std::vector<int> a_counts, b_counts;
  for (const auto& f : folds) {
    CHECK(f.size() == 2);
    int a = 0;
    for (auto i : f) a += y[i] == "A";
    a_counts.push_back(a);
    b_counts.push_back(static_cast<int>(f.size()) - a);
  }
  std::sort(a_counts.begin(), a_counts.end());
  std::sort(b_counts.begin(), b_counts.end());
  CHECK(a_counts == std::vector<int>{1, 1, 1, 1, 2});
  CHECK(b_counts == std::vector<int>{0, 1, 1, 1, 1});

  CHECK_THROWS_AS(stratified_kfold(Strings{"A", "B"}, 3, 1), ValidationError);
}

TEST_CASE("property: folds partition the indices with balanced class counts") {
  std::mt19937_64 rng(8);
  const Strings classes = {"A", "B", "C", "D"};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    Strings y;
    for (std::size_t i = 0; i < n; ++i) y.push_back(classes[rng() % (1 + rng() % 4)]);
    const int k = 2 + static_cast<int>(rng() % std::min<std::size_t>(n - 1, 9));
    const auto seed = rng();
    auto folds = stratified_kfold(y, k, seed);
    CHECK(folds == stratified_kfold(y, k, seed));
    REQUIRE(folds.size() == static_cast<std::size_t>(k));
    std::vector<int> seen(n, 0);
    for (const auto& f : folds) {
      for (auto i : f) ++seen[i];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    std::map<std::string, std::size_t> totals;
    for (const auto& v : y) ++totals[v];
    for (const auto& [cls, c] : totals) {
      for (const auto& f : folds) {
        std::size_t in_fold = 0;
        for (auto i : f) in_fold += y[i] == cls;
        CHECK(in_fold >= c / k);
        CHECK(in_fold <= (c + k - 1) / k);
      }
    }
    std::size_t lo = n, hi = 0;
    for (const auto& f : folds) {
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
    }
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("micro_f1 examples") {
  CHECK(micro_f1(Strings{"A", "B"}, Strings{"A", "B"}) == 1.0);
  CHECK(micro_f1(Strings{"A", "A", "B", "C"}, Strings{"A", "B", "B", "B"}) == 0.5);
  CHECK_THROWS_AS(micro_f1(Strings{"A"}, Strings{"A", "B"}), ValidationError);
  CHECK_THROWS_AS(micro_f1(Strings{}, Strings{}), ValidationError);
}

TEST_CASE("property: micro_f1 equals accuracy exactly") {
  std::mt19937_64 rng(12);
  const Strings classes = {"A", "B", "C", "D", "E"};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    Strings gold, pred;
    for (std::size_t i = 0; i < n; ++i) {
      gold.push_back(classes[rng() % 5]);
      pred.push_back(rng() % 2 ? gold.back() : classes[rng() % 5]);
    }
    CHECK(micro_f1(gold, pred) == accuracy(gold, pred));
  }
}

TEST_CASE("report formatting") {
  EvalReport r;
  r.attribute = "Against/For";
  r.mean = 0.8412;
  r.std_dev = 0.0219;
  r.overall = 0.95;
  CHECK(r.mean_std_string() == "0.84 (0.02)");
  auto table = render_eval_table(std::span(&r, 1));
  CHECK(table.find("Against/For") != std::string::npos);
  CHECK(table.find("0.95") != std::string::npos);
  CHECK(table.find("0.84 (0.02)") != std::string::npos);
  r.fold_scores = {0.8, 0.9};
  r.chosen.lambda = 0.1;
  auto back = eval_report_from_json(to_json(r));
  CHECK(back.fold_scores == r.fold_scores);
  CHECK(back.overall == r.overall);
  CHECK(back.chosen == r.chosen);
}

TEST_CASE("no leakage: fold vocabularies come from the training split only") {
  Corpus c = testsupport::separable_corpus(60, 4);
  auto data = labeled_subset(c, "Against/For");
  FeatureConfig f;
  f.min_df = 2;
  for (const auto& test : stratified_kfold(data.labels, 5, 42)) {
    auto split = prepare_fold(data, test, f);
    Strings train_texts;
    for (auto i : split.train_indices) train_texts.push_back(data.texts[i]);
    CHECK(split.vocab == build_vocab(train_texts, f));
    for (const auto& term : split.vocab.terms()) {
      std::size_t df = 0;
      for (const auto& t : train_texts) {
        auto grams = analyze(t, f);
        df += std::find(grams.begin(), grams.end(), term) != grams.end();
      }
      CHECK(df >= 2);
    }
    std::set<std::size_t> test_set(test.begin(), test.end());
    for (auto i : split.train_indices) CHECK_FALSE(test_set.contains(i));
    CHECK(split.train_indices.size() + split.test_indices.size() == data.labels.size());
  }
}

TEST_CASE("separable corpus: perfect CV and overall scores") {
  Corpus c = testsupport::separable_corpus(100, 1);
  auto report = cross_validate(c, "Against/For", cv_config(5, 42, {0.01, 0.1, 1}), small_features());
  CHECK(report.fold_scores.size() == 5);
  for (const auto& g : report.grid) CHECK(g.mean == 1.0);
  CHECK(report.mean == 1.0);
  CHECK(report.std_dev == 0.0);
  CHECK(report.chosen.lambda == 0.01);  // ties go to the smallest lambda
  auto final_model = finalize(c, "Against/For", report.chosen, small_features());
  CHECK(final_model.overall == 1.0);

  auto labeled = annotate_corpus({{"Against/For", final_model.model}}, c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(labeled.records[i].predicted_labels.at("Against/For").value == c.records[i].gold_labels.at("Against/For"));
    CHECK(labeled.records[i].gold_labels == c.records[i].gold_labels);
  }
}

TEST_CASE("cross-validation is deterministic and scores stay in range") {
  Corpus c = testsupport::separable_corpus(40, 2);
  // Flip some labels so scores are not all perfect.
  for (std::size_t i = 0; i < c.size(); i += 7) c.records[i].gold_labels["Against/For"] = "Uncommitted";
  auto a = cross_validate(c, "Against/For", cv_config(4, 9), small_features());
  auto b = cross_validate(c, "Against/For", cv_config(4, 9), small_features());
  CHECK(to_json(a) == to_json(b));
  for (double s : a.fold_scores) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
  CHECK(a.fold_scores.size() == 4);
}

TEST_CASE("constant labels give a perfect degenerate score") {
  Corpus c = testsupport::separable_corpus(20, 3);
  for (auto& r : c.records) r.gold_labels["Against/For"] = "For";
  auto report = cross_validate(c, "Against/For", cv_config(5, 1), small_features());
  CHECK(report.mean == 1.0);
}

TEST_CASE("records without a gold label are skipped; too few records is an error") {
  Corpus c = testsupport::separable_corpus(10, 5);
  c.records[0].gold_labels.clear();
  CHECK(labeled_subset(c, "Against/For").labels.size() == 9);
  CHECK_THROWS_AS(cross_validate(c, "Against/For", cv_config(10, 1), small_features()), ValidationError);
}

TEST_CASE("zero-weight model labels everything with the first class at p=0.5") {
  TrainedModel m;
  m.attribute = "Against/For";
  m.classes = {"Against", "For"};
  FeatureConfig f;
  f.min_df = 1;
  m.vocab = Vocabulary({"free"}, {1}, f);
  m.params = SoftmaxParams(2, 1);
  Corpus c = testsupport::separable_corpus(6, 1);
  auto out = annotate_corpus({{"Against/For", m}}, c);
  for (const auto& r : out.records) {
    CHECK(r.predicted_labels.at("Against/For").value == "Against");
    CHECK(r.predicted_labels.at("Against/For").prob == 0.5);
  }
}
