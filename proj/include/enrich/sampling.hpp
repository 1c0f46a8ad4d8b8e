#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "enrich/corpus.hpp"

namespace enrich {

enum class SamplingMode { RandomFraction, Stratified, TopKPerGroup };

SamplingMode sampling_mode_from_string(std::string_view s);

struct SamplingPlan {
  SamplingMode mode = SamplingMode::RandomFraction;
  double fraction = 0.1;
  int k = 1000;
  std::string group_attr = std::string(kSourceAttribute);
  std::uint64_t seed = 42;

  // Throws ValidationError on a bad fraction/k or an unknown group attribute.
  void check(const Corpus& corpus) const;
};

// Value of `attribute` used for grouping: the gold label, falling back to
// the source field for Source.
std::optional<std::string> group_value(const CorpusRecord& rec, std::string_view attribute);

// For each group, the k records with the most likes (ties: ascending id).
// Output is ordered by group (schema order), likes descending, id ascending.
Corpus top_k_by_engagement(const Corpus& corpus, int k, std::string_view group_attr);

struct SampleResult {
  Corpus sample;
  std::vector<std::string> notes;  // e.g. skipped empty strata
};

// Largest-remainder allocation of round(fraction * N) over strata of the
// given sizes. Ties in the remainder go to the earlier stratum.
std::vector<std::size_t> allocate_largest_remainder(const std::vector<std::size_t>& sizes, double fraction);

// Seeded sample with per-stratum allocation from allocate_largest_remainder.
// RandomFraction treats the whole corpus as one stratum. Selected records
// keep their input order.
SampleResult stratified_sample(const Corpus& corpus, const SamplingPlan& plan);

// Dispatches on plan.mode.
SampleResult sample(const Corpus& corpus, const SamplingPlan& plan);

struct SpamRuleSet {
  int min_tokens = 2;
  double max_url_fraction = 0.5;
  bool drop_exact_duplicates = true;

  void check() const;
};

struct Removal {
  std::string id;
  std::string reason;
};

struct SpamFilterResult {
  Corpus kept;
  Corpus removed;
  std::vector<Removal> reasons;  // one per removed record, in input order
};

SpamFilterResult spam_filter(const Corpus& corpus, const SpamRuleSet& rules);

}  // namespace enrich
