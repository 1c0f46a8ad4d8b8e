#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "enrich/corpus.hpp"
#include "enrich/error.hpp"

namespace enrich {

struct AnnotationEvent {
  std::string item_id;
  std::string annotator_id;
  std::string attribute;
  std::string value;
  std::int64_t timestamp_ms = 0;

  friend bool operator==(const AnnotationEvent&, const AnnotationEvent&) = default;
};

nlohmann::json to_json(const AnnotationEvent& e);
AnnotationEvent annotation_event_from_json(const nlohmann::json& j);

// Raised by record_label; the message is the rejection reason.
class LabelRejected : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct Progress {
  std::size_t labeled = 0;  // items with every annotatable attribute labeled
  std::size_t total = 0;
};

// Multi-annotator label store. Events are appended to an in-memory log (and
// to a JSONL file when one is attached); the current value of each
// (item, annotator, attribute) cell is the event with the greatest
// (timestamp, log position). All methods are safe to call concurrently.
class AnnotationStore {
 public:
  explicit AnnotationStore(Corpus items);

  // Replays `log_path` if it exists, then appends every new event to it.
  AnnotationStore(Corpus items, std::filesystem::path log_path);

  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  // Throws LabelRejected for an unknown item, attribute or value; the store
  // is unchanged in that case.
  void record_label(const AnnotationEvent& event);

  std::optional<std::string> current(std::string_view item_id, std::string_view annotator_id,
                                     std::string_view attribute) const;

  std::vector<AnnotationEvent> log() const;
  std::vector<std::string> annotators() const;

  // Every schema attribute except Source, which comes with the data.
  std::vector<std::string> annotatable_attributes() const;

  // item -> annotator -> current value, for one attribute.
  std::map<std::string, std::map<std::string, std::string>> labels_for(std::string_view attribute) const;

  // Values of items labeled by both annotators, aligned by item id.
  std::pair<std::vector<std::string>, std::vector<std::string>> co_labeled(std::string_view attribute,
                                                                           std::string_view first,
                                                                           std::string_view second) const;

  // Lowest-id item this annotator has not labeled for every annotatable
  // attribute; nullopt when all are done.
  std::optional<CorpusRecord> next_task(std::string_view annotator_id) const;

  Progress progress(std::string_view annotator_id) const;

  const Corpus& corpus() const { return items_; }

 private:
  struct Cell {
    std::string value;
    std::int64_t timestamp_ms = 0;
    std::size_t seq = 0;
  };
  using Key = std::tuple<std::string, std::string, std::string>;  // item, annotator, attribute

  void check_event(const AnnotationEvent& e) const;
  void apply(const AnnotationEvent& e, std::size_t seq);
  bool fully_labeled(const std::string& item, std::string_view annotator) const;

  Corpus items_;
  std::vector<std::string> sorted_ids_;
  std::optional<std::filesystem::path> log_path_;
  mutable std::shared_mutex mu_;
  std::vector<AnnotationEvent> log_;
  std::map<Key, Cell> cells_;
};

// Pure metrics over two aligned label lists.
double percent_agreement(std::span<const std::string> a, std::span<const std::string> b);

// Unweighted Cohen's kappa. Returns 1.0 when chance agreement is 1 and the
// observed agreement is 1 (both raters used a single, shared category).
double cohens_kappa(std::span<const std::string> a, std::span<const std::string> b);

// Throw ValidationError("no overlap") when the pair shares no labeled item.
double percent_agreement(const AnnotationStore& store, std::string_view attribute,
                         std::pair<std::string, std::string> annotators);
double cohens_kappa(const AnnotationStore& store, std::string_view attribute,
                    std::pair<std::string, std::string> annotators);

struct AgreementReport {
  std::string attribute;
  std::pair<std::string, std::string> annotator_pair;
  std::size_t n_items = 0;
  double percent_agreement = 0.0;
  double kappa = 0.0;
};

nlohmann::json to_json(const AgreementReport& r);

struct AgreementSummary {
  std::string attribute;
  std::vector<AgreementReport> pairs;  // only pairs with overlap
  std::optional<double> mean_kappa;    // mean of pairwise kappa
};

nlohmann::json to_json(const AgreementSummary& s);

AgreementSummary agreement_summary(const AnnotationStore& store, std::string_view attribute);

enum class AdjudicationPolicy { Majority, StrictUnanimous };

AdjudicationPolicy adjudication_policy_from_string(std::string_view s);

struct AdjudicationResult {
  std::map<std::string, std::string> gold;  // item -> value
  std::vector<std::string> unresolved;      // labeled items without a gold value
};

AdjudicationResult adjudicate(const AnnotationStore& store, std::string_view attribute, AdjudicationPolicy policy);

// Copy of `corpus` with the adjudicated gold labels written into gold_labels.
Corpus apply_gold(const Corpus& corpus, std::string_view attribute, const AdjudicationResult& result);

}  // namespace enrich
