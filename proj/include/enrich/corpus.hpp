#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace enrich {

enum class AttributeKind { Conversational, Demographic, Source };

std::string_view to_string(AttributeKind kind);
AttributeKind attribute_kind_from_string(std::string_view s);

struct AttributeSchema {
  std::string name;
  std::vector<std::string> values;
  AttributeKind kind = AttributeKind::Conversational;

  bool contains(std::string_view value) const;
  // Position of `value` in `values`, or -1.
  int index_of(std::string_view value) const;

  friend bool operator==(const AttributeSchema&, const AttributeSchema&) = default;
};

inline constexpr std::string_view kSourceAttribute = "Source";

struct PredictedLabel {
  std::string value;
  double prob = 0.0;

  friend bool operator==(const PredictedLabel&, const PredictedLabel&) = default;
};

struct Enrichment {
  std::optional<std::string> gender_pred;
  std::vector<std::string> ethnicity_path;  // empty when not enriched
  std::optional<double> ethnicity_confidence;

  bool empty() const { return !gender_pred && ethnicity_path.empty() && !ethnicity_confidence; }
  friend bool operator==(const Enrichment&, const Enrichment&) = default;
};

struct CorpusRecord {
  std::string id;
  std::string text;
  std::string source;
  std::optional<std::string> created_at;
  std::optional<std::string> author_name;
  std::optional<std::string> author_pseudonym;
  std::optional<std::int64_t> likes;
  std::map<std::string, std::string> gold_labels;
  std::map<std::string, PredictedLabel> predicted_labels;
  Enrichment enriched;

  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

// Gold value for `attribute`. The Source attribute falls back to the
// record's `source` field when no explicit gold label exists.
std::optional<std::string> gold_value(const CorpusRecord& rec, std::string_view attribute);

std::optional<std::string> predicted_value(const CorpusRecord& rec, std::string_view attribute);

class Corpus {
 public:
  std::vector<CorpusRecord> records;
  std::vector<AttributeSchema> schemas;  // declaration order is the display order
  std::string provenance;

  const AttributeSchema* schema(std::string_view name) const;
  const AttributeSchema& require_schema(std::string_view name) const;
  const CorpusRecord* find(std::string_view id) const;
  std::size_t size() const { return records.size(); }

  // A corpus with the same schemas and provenance and no records.
  Corpus empty_like() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Attribute schemas of the tuition-free-college case study: ten attributes
// with the value vocabularies of the human-annotated data.
std::vector<AttributeSchema> default_schemas();

// "NBC News" is accepted as an alias of the Source value "MSN".
std::string canonical_source(std::string_view source);

enum class CorpusFormat { Jsonl, Csv };

CorpusFormat corpus_format_from_path(const std::filesystem::path& path);

struct WriteOptions {
  // Drops author_name from every written record. With a non-empty key the
  // pseudonym is (re)computed from the name first.
  bool anonymize_on_write = false;
  std::string anonymization_key;
};

// `<path>.schema.json`.
std::filesystem::path schema_sidecar_path(const std::filesystem::path& corpus_path);

nlohmann::json schemas_to_json(const std::vector<AttributeSchema>& schemas);
std::vector<AttributeSchema> schemas_from_json(const nlohmann::json& j);
std::vector<AttributeSchema> load_schema_file(const std::filesystem::path& path);

nlohmann::json record_to_json(const CorpusRecord& rec);
CorpusRecord record_from_json(const nlohmann::json& j);

// Schemas come from the sidecar when present, else from `fallback_schemas`,
// else from default_schemas().
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   const std::vector<AttributeSchema>* fallback_schemas = nullptr);
Corpus load_corpus(const std::filesystem::path& path);

Corpus parse_jsonl(std::string_view content, std::vector<AttributeSchema> schemas);
Corpus parse_csv_corpus(std::string_view content, std::vector<AttributeSchema> schemas);

void write_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format,
                  WriteOptions opts = {});
void write_corpus(const Corpus& corpus, const std::filesystem::path& path, WriteOptions opts = {});

std::string to_jsonl(const Corpus& corpus, WriteOptions opts = {});
std::string to_csv(const Corpus& corpus);

// Keyed pseudonym: HMAC-SHA256 over the normalized name, first 16 hex chars.
std::string pseudonym(std::string_view author_name, std::string_view key);

Corpus anonymize(const Corpus& corpus, std::string_view key);

struct Violation {
  std::string record_id;
  std::string field;
  std::string reason;

  friend bool operator==(const Violation&, const Violation&) = default;
};

std::vector<Violation> validate(const Corpus& corpus);

}  // namespace enrich
