#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "enrich/classifier.hpp"
#include "enrich/corpus.hpp"
#include "enrich/features.hpp"

namespace enrich {

// L2 grid searched by default.
std::vector<Hyperparams> default_grid();
std::vector<Hyperparams> grid_from_lambdas(std::span<const double> lambdas, const Hyperparams& base = {});

struct CVConfig {
  int k = 5;
  std::uint64_t seed = 42;
  std::vector<Hyperparams> grid = default_grid();
};

// k disjoint folds covering [0, N). Each class is shuffled with the seed and
// dealt round-robin, continuing from where the previous class stopped, so
// per-fold class counts differ by at most one and fold sizes stay balanced.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const std::string> labels, int k,
                                                       std::uint64_t seed);

// Micro-averaged F1 from class-summed TP/FP/FN.
double micro_f1(std::span<const std::string> gold, std::span<const std::string> pred);

struct GridPointScore {
  Hyperparams hyper;
  std::vector<double> fold_scores;
  double mean = 0.0;
  double std_dev = 0.0;
};

struct EvalReport {
  std::string attribute;
  std::vector<double> fold_scores;  // for the chosen grid point
  double mean = 0.0;
  double std_dev = 0.0;  // population
  std::optional<double> overall;  // filled by finalize
  Hyperparams chosen;
  std::size_t n_examples = 0;
  std::vector<GridPointScore> grid;

  // "0.84 (0.02)"
  std::string mean_std_string() const;
};

nlohmann::json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

// Table with one row per attribute and the columns "overall" and
// "mean (std. dev.)".
std::string render_eval_table(std::span<const EvalReport> reports);

struct LabeledSet {
  std::vector<std::string> texts;
  std::vector<std::string> labels;
  std::vector<std::string> class_order;
};

// Records carrying a gold label for `attribute`; others are skipped.
LabeledSet labeled_subset(const Corpus& corpus, std::string_view attribute);

// One train/test round. The vocabulary is built from the training split only.
struct FoldSplit {
  std::vector<std::size_t> train_indices, test_indices;
  Vocabulary vocab;
  SparseMatrix train_x, test_x;
  std::vector<std::string> train_y, test_y;
};

FoldSplit prepare_fold(const LabeledSet& data, std::span<const std::size_t> test_idx, const FeatureConfig& features);

EvalReport cross_validate(const LabeledSet& data, std::string_view attribute, const CVConfig& cv,
                          const FeatureConfig& features);
EvalReport cross_validate(const Corpus& corpus, std::string_view attribute, const CVConfig& cv,
                          const FeatureConfig& features);

struct FinalModel {
  TrainedModel model;
  double overall = 0.0;  // in-sample micro-F1 on the full labeled set
};

FinalModel finalize(const LabeledSet& data, std::string_view attribute, const Hyperparams& chosen,
                    const FeatureConfig& features);
FinalModel finalize(const Corpus& corpus, std::string_view attribute, const Hyperparams& chosen,
                    const FeatureConfig& features);

Corpus annotate_corpus(const std::map<std::string, TrainedModel>& models, const Corpus& corpus);

}  // namespace enrich
