#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "enrich/classifier.hpp"
#include "enrich/corpus.hpp"

namespace enrich {

enum class Gender { Male, Female, Unknown };

std::string_view to_string(Gender g);

struct NameCounts {
  std::uint64_t female = 0;
  std::uint64_t male = 0;
};

// Given name -> counts summed over every input line (i.e. over all years).
class NameGenderDB {
 public:
  // `name` is normalized (NFC, lowercase) before insertion.
  void add(std::string_view name, char sex, std::uint64_t count);
  std::optional<NameCounts> lookup(std::string_view given_name) const;
  std::size_t size() const { return counts_.size(); }

 private:
  std::unordered_map<std::string, NameCounts> counts_;
};

// SSA "name,sex,count" lines, sex in {F, M}. An optional trailing year
// column is ignored. Throws ParseError naming the line on bad input.
NameGenderDB parse_name_db(std::string_view csv);
NameGenderDB load_name_db(const std::filesystem::path& path);

inline constexpr double kDefaultGenderThreshold = 0.95;

// Female when female/(female+male) >= threshold, Male when the male share
// is, otherwise (or when the given name is absent) Unknown.
Gender infer_gender(std::string_view full_name, const NameGenderDB& db, double threshold = kDefaultGenderThreshold);

// Thirteen leaf categories of the three-level name-ethnicity taxonomy, most
// general level first, in reporting order.
const std::vector<std::vector<std::string>>& ethnicity_taxonomy();

inline constexpr std::string_view kUnknown = "Unknown";

struct EthnicityPath {
  std::vector<std::string> levels{std::string(kUnknown)};
  double confidence = 0.0;

  bool unknown() const { return levels.size() == 1 && levels[0] == kUnknown; }
  // "GreaterEuropean-WestEuropean-Hispanic"
  std::string joined() const;
  friend bool operator==(const EthnicityPath&, const EthnicityPath&) = default;
};

// True for ["Unknown"] and for every non-empty prefix of a taxonomy leaf.
bool is_valid_path(std::span<const std::string> levels);

// Splits on ',' when present, else on '-'. Paths outside the taxonomy
// become Unknown.
EthnicityPath parse_ethnicity_path(std::string_view path, double confidence);

inline constexpr double kEthnicityConfidenceCutoff = 0.5;

// Interprets a provider response mapping taxonomy path -> probability: the
// most probable path, or Unknown when it is below the cutoff or invalid.
EthnicityPath ethnicity_from_response(const nlohmann::json& body, double cutoff = kEthnicityConfidenceCutoff);

class EthnicityProvider {
 public:
  virtual ~EthnicityProvider() = default;
  // `normalized_name` comes from text::normalize_name. Never throws for a
  // failed lookup; returns Unknown instead.
  virtual EthnicityPath lookup(const std::string& normalized_name) = 0;
  // Default: sequential lookups.
  virtual std::vector<EthnicityPath> lookup_many(std::span<const std::string> normalized_names);
};

// Character n-gram softmax classifier over the taxonomy leaves.
class LocalEthnicityProvider : public EthnicityProvider {
 public:
  explicit LocalEthnicityProvider(TrainedModel model, double cutoff = kEthnicityConfidenceCutoff);

  // Rows of (full name, leaf path such as "GreaterEuropean-WestEuropean-Hispanic").
  static LocalEthnicityProvider train(std::span<const std::pair<std::string, std::string>> examples,
                                      const Hyperparams& hyper = default_hyperparams());
  static LocalEthnicityProvider train_from_file(const std::filesystem::path& csv,
                                                const Hyperparams& hyper = default_hyperparams());

  static FeatureConfig feature_config();
  static Hyperparams default_hyperparams();

  EthnicityPath lookup(const std::string& normalized_name) override;
  const TrainedModel& model() const { return model_; }

 private:
  TrainedModel model_;
  double cutoff_;
};

// Reads "name,path" rows; a first row of "name,ethnicity" is treated as a header.
std::vector<std::pair<std::string, std::string>> load_ethnicity_training(const std::filesystem::path& csv);

struct HttpResult {
  int status = 0;  // 0 when the request did not complete
  std::string body;
};

using HttpGet = std::function<HttpResult(const std::string& url)>;

// cpp-httplib GET with the given timeout.
HttpGet make_http_get(std::chrono::milliseconds timeout = std::chrono::milliseconds(10000));

std::string url_encode(std::string_view s);

// Remote name-ethnicity service. `{name}` in the URL template is replaced
// by the URL-encoded name. Results are cached in memory and, when a cache
// path is given, in a JSONL file of {name_hash, path, confidence}.
class RemoteEthnicityProvider : public EthnicityProvider {
 public:
  RemoteEthnicityProvider(std::string url_template, HttpGet get,
                          std::optional<std::filesystem::path> cache_path = std::nullopt, std::size_t max_in_flight = 4,
                          double cutoff = kEthnicityConfidenceCutoff);

  EthnicityPath lookup(const std::string& normalized_name) override;
  // Deduplicates names and issues at most max_in_flight requests at once.
  std::vector<EthnicityPath> lookup_many(std::span<const std::string> normalized_names) override;

  std::size_t requests_made() const;
  std::vector<std::string> failures() const;

 private:
  // nullopt when the request failed.
  std::optional<EthnicityPath> fetch(const std::string& name);
  std::optional<EthnicityPath> cached(const std::string& hash) const;
  void store(const std::string& hash, const EthnicityPath& path);

  std::string url_template_;
  HttpGet get_;
  std::optional<std::filesystem::path> cache_path_;
  std::size_t max_in_flight_;
  double cutoff_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, EthnicityPath> cache_;
  std::size_t requests_ = 0;
  std::vector<std::string> failures_;
};

struct EnrichmentSummary {
  std::map<std::string, std::size_t> ethnicity;  // joined path -> count
  std::map<std::string, std::size_t> gender;     // Male/Female/Unknown -> count

  std::size_t ethnicity_total() const;
  std::size_t gender_total() const;
};

EnrichmentSummary summarize_enrichment(const Corpus& corpus);

// Row labels in reporting order: Ethnicity=Unknown, the taxonomy leaves,
// any other observed paths, then Gender=Male, Gender=Female, Gender=Unknown.
std::vector<std::pair<std::string, std::size_t>> enrichment_rows(const EnrichmentSummary& s);

// Predicted gender and ethnicity counts, one column per dataset.
std::string render_enrichment_table(std::span<const std::pair<std::string, EnrichmentSummary>> datasets);

struct EnrichResult {
  Corpus corpus;
  EnrichmentSummary summary;
};

// Fills enriched.gender_pred and enriched.ethnicity_path for every record.
// Records without an author name get Unknown for both.
EnrichResult enrich(const Corpus& corpus, const NameGenderDB& db, EthnicityProvider& provider,
                    double threshold = kDefaultGenderThreshold);

}  // namespace enrich
