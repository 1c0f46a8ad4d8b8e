#include "enrich/evaluation.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>

#include "enrich/error.hpp"

namespace enrich {

using nlohmann::json;

std::vector<Hyperparams> default_grid() {
  static constexpr double kLambdas[] = {0.01, 0.1, 1.0, 10.0};
  return grid_from_lambdas(kLambdas);
}

std::vector<Hyperparams> grid_from_lambdas(std::span<const double> lambdas, const Hyperparams& base) {
  std::vector<Hyperparams> grid;
  for (double l : lambdas) {
    Hyperparams h = base;
    h.lambda = l;
    h.check();
    grid.push_back(h);
  }
  return grid;
}

namespace {

// Unbiased index in [0, bound) from a 64-bit Mersenne Twister; avoids the
// implementation-defined std::uniform_int_distribution.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(rng, i)]);
}

}  // namespace

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const std::string> labels, int k,
                                                       std::uint64_t seed) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (static_cast<std::size_t>(k) > labels.size()) {
    throw ValidationError("k=" + std::to_string(k) + " exceeds the number of examples (" +
                          std::to_string(labels.size()) + ")");
  }
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  std::size_t next = 0;
  for (auto& [label, idx] : by_class) {
    shuffle(idx, rng);
    for (std::size_t i : idx) {
      folds[next].push_back(i);
      next = (next + 1) % folds.size();
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

double micro_f1(std::span<const std::string> gold, std::span<const std::string> pred) {
  if (gold.size() != pred.size()) throw ValidationError("gold and predicted label lists differ in length");
  if (gold.empty()) throw ValidationError("micro_f1 needs at least one item");
  std::map<std::string, std::array<std::size_t, 3>> counts;  // tp, fp, fn
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == pred[i]) {
      ++counts[gold[i]][0];
    } else {
      ++counts[pred[i]][1];
      ++counts[gold[i]][2];
    }
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& [c, v] : counts) {
    tp += v[0];
    fp += v[1];
    fn += v[2];
  }
  // 2PR/(P+R) written over the integer counts: one rounding step, so for
  // single-label data (fp == fn) the result is bit-identical to accuracy.
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
}

namespace {

std::string two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void mean_std(std::span<const double> xs, double& mean, double& sd) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  sd = std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace

std::string EvalReport::mean_std_string() const { return two_decimals(mean) + " (" + two_decimals(std_dev) + ")"; }

json to_json(const EvalReport& r) {
  json grid = json::array();
  for (const auto& g : r.grid) {
    grid.push_back({{"hyperparams", to_json(g.hyper)}, {"fold_scores", g.fold_scores}, {"mean", g.mean}, {"std", g.std_dev}});
  }
  json j = {{"attribute", r.attribute},
            {"fold_scores", r.fold_scores},
            {"mean", r.mean},
            {"std", r.std_dev},
            {"overall", r.overall ? json(*r.overall) : json(nullptr)},
            {"chosen", to_json(r.chosen)},
            {"n_examples", r.n_examples},
            {"grid", grid}};
  return j;
}

EvalReport eval_report_from_json(const json& j) {
  EvalReport r;
  try {
    r.attribute = j.at("attribute").get<std::string>();
    r.fold_scores = j.at("fold_scores").get<std::vector<double>>();
    r.mean = j.at("mean").get<double>();
    r.std_dev = j.at("std").get<double>();
    if (j.contains("overall") && !j["overall"].is_null()) r.overall = j["overall"].get<double>();
    r.chosen = hyperparams_from_json(j.at("chosen"));
    r.n_examples = j.value("n_examples", std::size_t{0});
    for (const auto& g : j.value("grid", json::array())) {
      r.grid.push_back({hyperparams_from_json(g.at("hyperparams")), g.at("fold_scores").get<std::vector<double>>(),
                        g.at("mean").get<double>(), g.at("std").get<double>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed evaluation report: ") + e.what());
  }
  return r;
}

std::string render_eval_table(std::span<const EvalReport> reports) {
  std::size_t width = 0;
  for (const auto& r : reports) width = std::max(width, r.attribute.size());
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  std::string out = pad("", width) + "  overall  mean (std. dev.)\n";
  for (const auto& r : reports) {
    std::string overall = r.overall ? two_decimals(*r.overall) : std::string("-");
    std::string o = std::string(7 - std::min<std::size_t>(7, overall.size()), ' ') + overall;
    out += pad(r.attribute, width) + "  " + o + "  " + r.mean_std_string() + "\n";
  }
  return out;
}

LabeledSet labeled_subset(const Corpus& corpus, std::string_view attribute) {
  const AttributeSchema& schema = corpus.require_schema(attribute);
  LabeledSet data;
  data.class_order = schema.values;
  for (const auto& r : corpus.records) {
    auto g = gold_value(r, attribute);
    if (!g) continue;
    data.texts.push_back(r.text);
    data.labels.push_back(*g);
  }
  return data;
}

namespace {

template <typename T>
std::vector<T> pick(const std::vector<T>& v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace

FoldSplit prepare_fold(const LabeledSet& data, std::span<const std::size_t> test_idx, const FeatureConfig& features) {
  const std::size_t n = data.labels.size();
  FoldSplit fd;
  fd.test_indices.assign(test_idx.begin(), test_idx.end());
  std::sort(fd.test_indices.begin(), fd.test_indices.end());
  std::size_t t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (t < fd.test_indices.size() && fd.test_indices[t] == i) {
      ++t;
    } else {
      fd.train_indices.push_back(i);
    }
  }
  auto train_texts = pick(data.texts, fd.train_indices);
  fd.vocab = build_vocab(train_texts, features);
  fd.train_x = vectorize_all(train_texts, fd.vocab);
  fd.test_x = vectorize_all(pick(data.texts, fd.test_indices), fd.vocab);
  fd.train_y = pick(data.labels, fd.train_indices);
  fd.test_y = pick(data.labels, fd.test_indices);
  return fd;
}

EvalReport cross_validate(const LabeledSet& data, std::string_view attribute, const CVConfig& cv,
                          const FeatureConfig& features) {
  if (cv.grid.empty()) throw ValidationError("hyperparameter grid is empty");
  if (cv.k < 2) throw ValidationError("cross-validation needs k >= 2");
  const std::size_t n = data.labels.size();
  if (n < static_cast<std::size_t>(cv.k)) {
    throw ValidationError("attribute " + std::string(attribute) + " has " + std::to_string(n) +
                          " labeled records, fewer than k=" + std::to_string(cv.k));
  }
  auto folds = stratified_kfold(data.labels, cv.k, cv.seed);

  // Vocabulary and vectors depend only on the split, not on the grid point.
  std::vector<FoldSplit> prepared;
  prepared.reserve(folds.size());
  for (const auto& test_idx : folds) prepared.push_back(prepare_fold(data, test_idx, features));

  EvalReport report;
  report.attribute = std::string(attribute);
  report.n_examples = n;
  const GridPointScore* best = nullptr;
  for (const auto& h : cv.grid) {
    GridPointScore gp;
    gp.hyper = h;
    for (const auto& fd : prepared) {
      TrainedModel m = train(report.attribute, fd.vocab, fd.train_x, fd.train_y, data.class_order, h);
      std::vector<std::string> pred;
      pred.reserve(fd.test_y.size());
      for (const auto& row : fd.test_x.rows) pred.push_back(m.predict(row).value);
      gp.fold_scores.push_back(micro_f1(fd.test_y, pred));
    }
    mean_std(gp.fold_scores, gp.mean, gp.std_dev);
    report.grid.push_back(std::move(gp));
  }
  for (const auto& gp : report.grid) {
    if (best == nullptr || gp.mean > best->mean || (gp.mean == best->mean && gp.hyper.lambda < best->hyper.lambda)) {
      best = &gp;
    }
  }
  report.fold_scores = best->fold_scores;
  report.mean = best->mean;
  report.std_dev = best->std_dev;
  report.chosen = best->hyper;
  return report;
}

EvalReport cross_validate(const Corpus& corpus, std::string_view attribute, const CVConfig& cv,
                          const FeatureConfig& features) {
  return cross_validate(labeled_subset(corpus, attribute), attribute, cv, features);
}

FinalModel finalize(const LabeledSet& data, std::string_view attribute, const Hyperparams& chosen,
                    const FeatureConfig& features) {
  if (data.labels.empty()) throw ValidationError("no labeled records for " + std::string(attribute));
  Vocabulary vocab = build_vocab(data.texts, features);
  SparseMatrix x = vectorize_all(data.texts, vocab);
  FinalModel out{train(std::string(attribute), std::move(vocab), x, data.labels, data.class_order, chosen), 0.0};
  std::vector<std::string> pred;
  pred.reserve(x.size());
  for (const auto& row : x.rows) pred.push_back(out.model.predict(row).value);
  out.overall = micro_f1(data.labels, pred);
  return out;
}

FinalModel finalize(const Corpus& corpus, std::string_view attribute, const Hyperparams& chosen,
                    const FeatureConfig& features) {
  return finalize(labeled_subset(corpus, attribute), attribute, chosen, features);
}

Corpus annotate_corpus(const std::map<std::string, TrainedModel>& models, const Corpus& corpus) {
  Corpus out = corpus;
  for (const auto& [attr, model] : models) {
    for (auto& r : out.records) {
      Prediction p = model.predict_text(r.text);
      r.predicted_labels[attr] = PredictedLabel{p.value, p.prob};
    }
  }
  return out;
}

}  // namespace enrich
