#pragma once

// Fixtures shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "enrich/classifier.hpp"
#include "enrich/corpus.hpp"
#include "enrich/features.hpp"

namespace testsupport {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("enrich-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline enrich::CorpusRecord record(std::string id, std::string text, std::string source = "CNN",
                                   std::int64_t likes = 0) {
  enrich::CorpusRecord r;
  r.id = std::move(id);
  r.text = std::move(text);
  r.source = std::move(source);
  r.likes = likes;
  return r;
}

inline enrich::Corpus corpus_of(std::vector<enrich::CorpusRecord> records) {
  enrich::Corpus c;
  c.schemas = enrich::default_schemas();
  c.records = std::move(records);
  return c;
}

// Two classes with disjoint keyword vocabularies plus shared filler words.
// Every document is classifiable from a single keyword.
inline enrich::Corpus separable_corpus(std::size_t n_docs, std::uint64_t seed) {
  static const std::vector<std::string> kAgainst = {"handout", "unaffordable", "wasteful", "bankrupt", "freeloaders",
                                                    "burden"};
  static const std::vector<std::string> kFor = {"opportunity", "invest", "fairness", "overdue", "empower",
                                                "deserve"};
  static const std::vector<std::string> kFiller = {"the", "plan", "college", "people", "this", "will", "we",
                                                   "tuition", "is", "so"};
  std::mt19937_64 rng(seed);
  auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
  std::vector<enrich::CorpusRecord> recs;
  for (std::size_t i = 0; i < n_docs; ++i) {
    const bool against = i % 2 == 0;
    const auto& kw = against ? kAgainst : kFor;
    std::string text = pick(kFiller) + " " + pick(kw) + " " + pick(kFiller) + " " + pick(kw) + " " + pick(kFiller);
    char id[32];
    std::snprintf(id, sizeof id, "d%04zu", i);
    auto r = record(id, text, i % 4 == 0 ? "CNN" : "FOX", static_cast<std::int64_t>(rng() % 100));
    r.gold_labels["Against/For"] = against ? "Against" : "For";
    recs.push_back(std::move(r));
  }
  return corpus_of(std::move(recs));
}

struct RandomInstance {
  enrich::SoftmaxParams params;
  enrich::SparseMatrix x;
  std::vector<int> y;
  double lambda = 0.0;
};

// Small dense-ish problem with random parameters, for gradient checks.
inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t max_classes = 3, std::size_t max_dim = 10,
                                      std::size_t max_n = 16) {
  std::uniform_int_distribution<std::size_t> cls(2, max_classes), dim(1, max_dim), n(1, max_n);
  std::uniform_real_distribution<double> w(-1.0, 1.0), val(0.1, 3.0), lam(0.0, 1.0);
  RandomInstance inst;
  const std::size_t c = cls(rng), d = dim(rng), count = n(rng);
  inst.params = enrich::SoftmaxParams(c, d);
  for (double& t : inst.params.flat()) t = w(rng);
  inst.x.dim = d;
  for (std::size_t i = 0; i < count; ++i) {
    enrich::SparseVector v;
    v.dim = d;
    for (std::uint32_t j = 0; j < d; ++j) {
      if (rng() % 2 == 0) {
        v.indices.push_back(j);
        v.values.push_back(val(rng));
      }
    }
    inst.x.rows.push_back(std::move(v));
    inst.y.push_back(static_cast<int>(rng() % c));
  }
  inst.lambda = lam(rng);
  return inst;
}

// Relative error ||analytic - numeric|| / max(||analytic||, ||numeric||)
// of the full gradient against central finite differences.
inline double gradient_check_error(const RandomInstance& inst, double h = 1e-5) {
  auto g = enrich::loss_and_gradient(inst.params, inst.x, inst.y, inst.lambda);
  std::vector<double> analytic = g.grad_w;
  analytic.insert(analytic.end(), g.grad_b.begin(), g.grad_b.end());
  enrich::SoftmaxParams p = inst.params;
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < p.flat().size(); ++i) {
    const double orig = p.flat()[i];
    p.flat()[i] = orig + h;
    const double up = enrich::loss_value(p, inst.x, inst.y, inst.lambda);
    p.flat()[i] = orig - h;
    const double down = enrich::loss_value(p, inst.x, inst.y, inst.lambda);
    p.flat()[i] = orig;
    const double numeric = (up - down) / (2 * h);
    diff2 += (numeric - analytic[i]) * (numeric - analytic[i]);
    a2 += analytic[i] * analytic[i];
    n2 += numeric * numeric;
  }
  const double denom = std::max(std::sqrt(a2), std::sqrt(n2));
  return denom == 0.0 ? std::sqrt(diff2) : std::sqrt(diff2) / denom;
}

// Cohen's kappa from an explicit contingency table, written independently
// of the library: cells[i][j] counts items rated category i by the first
// rater and j by the second.
inline double kappa_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> cats;
  for (const auto* side : {&a, &b}) {
    for (const auto& v : *side) {
      if (std::find(cats.begin(), cats.end(), v) == cats.end()) cats.push_back(v);
    }
  }
  const std::size_t k = cats.size();
  std::vector<std::vector<double>> cells(k, std::vector<double>(k, 0.0));
  auto at = [&](const std::string& v) { return std::find(cats.begin(), cats.end(), v) - cats.begin(); };
  for (std::size_t i = 0; i < a.size(); ++i) cells[at(a[i])][at(b[i])] += 1.0;
  const double n = static_cast<double>(a.size());
  double diag = 0.0, expected = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    diag += cells[i][i];
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row += cells[i][j];
      col += cells[j][i];
    }
    expected += row * col;
  }
  const double po = diag / n, pe = expected / (n * n);
  if (pe == 1.0) return 1.0;
  return (po - pe) / (1.0 - pe);
}

// Ten items; the second rater disagrees on items 6 and 7 only.
inline std::pair<std::vector<std::string>, std::vector<std::string>> kappa_fixture() {
  std::vector<std::string> a, b;
  for (int item = 1; item <= 10; ++item) {
    a.push_back(item <= 6 ? "Civil" : "Uncivil");
    b.push_back(item <= 5 || item == 7 ? "Civil" : "Uncivil");
  }
  return {a, b};
}

}  // namespace testsupport
