#include "enrich/corpus.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "enrich/error.hpp"
#include "enrich/io.hpp"
#include "enrich/text.hpp"

namespace enrich {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::Conversational:
      return "conversational";
    case AttributeKind::Demographic:
      return "demographic";
    case AttributeKind::Source:
      return "source";
  }
  return "conversational";
}

AttributeKind attribute_kind_from_string(std::string_view s) {
  if (s == "conversational") return AttributeKind::Conversational;
  if (s == "demographic") return AttributeKind::Demographic;
  if (s == "source") return AttributeKind::Source;
  throw ParseError("unknown attribute kind: " + std::string(s));
}

bool AttributeSchema::contains(std::string_view value) const { return index_of(value) >= 0; }

int AttributeSchema::index_of(std::string_view value) const {
  auto it = std::find(values.begin(), values.end(), value);
  return it == values.end() ? -1 : static_cast<int>(it - values.begin());
}

std::optional<std::string> gold_value(const CorpusRecord& rec, std::string_view attribute) {
  if (auto it = rec.gold_labels.find(std::string(attribute)); it != rec.gold_labels.end()) {
    return it->second;
  }
  if (attribute == kSourceAttribute && !rec.source.empty()) return rec.source;
  return std::nullopt;
}

std::optional<std::string> predicted_value(const CorpusRecord& rec, std::string_view attribute) {
  if (auto it = rec.predicted_labels.find(std::string(attribute)); it != rec.predicted_labels.end()) {
    return it->second.value;
  }
  return std::nullopt;
}

const AttributeSchema* Corpus::schema(std::string_view name) const {
  for (const auto& s : schemas) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const AttributeSchema& Corpus::require_schema(std::string_view name) const {
  const AttributeSchema* s = schema(name);
  if (s == nullptr) throw ValidationError("unknown attribute: " + std::string(name));
  return *s;
}

const CorpusRecord* Corpus::find(std::string_view id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

Corpus Corpus::empty_like() const {
  Corpus c;
  c.schemas = schemas;
  c.provenance = provenance;
  return c;
}

std::vector<AttributeSchema> default_schemas() {
  using K = AttributeKind;
  return {
      {"Against/For", {"Against", "For", "Uncommitted"}, K::Conversational},
      {"Age Category", {"29 and Under", "30-49", "50 and Over", "Unknown"}, K::Demographic},
      {"Civil/Uncivil", {"Civil", "Uncivil"}, K::Conversational},
      {"Gender", {"Female", "Male", "Unknown"}, K::Demographic},
      {"Military Family", {"Military Family", "Not Military Family", "Undetermined"}, K::Demographic},
      {"Neoliberalism/Social Good", {"Neoliberalism", "Social Good", "Unknown"}, K::Conversational},
      {"OnTopic/Not-OnTopic", {"Not On-Topic", "On-Topic"}, K::Conversational},
      {"Political Leaning", {"Conservative Leaning", "Liberal Leaning", "Undetermined"}, K::Demographic},
      {"Race", {"Asian", "Black", "International", "Latino (a)", "Middle Eastern", "Unknown", "White"},
       K::Demographic},
      {std::string(kSourceAttribute), {"CNN", "FOX", "MSN", "White House"}, K::Source},
  };
}

std::string canonical_source(std::string_view source) {
  if (source == "NBC News") return "MSN";
  return std::string(source);
}

CorpusFormat corpus_format_from_path(const fs::path& path) {
  return path.extension() == ".csv" ? CorpusFormat::Csv : CorpusFormat::Jsonl;
}

fs::path schema_sidecar_path(const fs::path& corpus_path) {
  fs::path p = corpus_path;
  p += ".schema.json";
  return p;
}

json schemas_to_json(const std::vector<AttributeSchema>& schemas) {
  json attrs = json::array();
  for (const auto& s : schemas) {
    attrs.push_back({{"name", s.name}, {"values", s.values}, {"kind", to_string(s.kind)}});
  }
  return json{{"attributes", attrs}};
}

std::vector<AttributeSchema> schemas_from_json(const json& j) {
  if (!j.is_object() || !j.contains("attributes") || !j["attributes"].is_array()) {
    throw ParseError("schema file must be an object with an \"attributes\" array");
  }
  std::vector<AttributeSchema> out;
  std::set<std::string> names;
  for (const auto& a : j["attributes"]) {
    AttributeSchema s;
    try {
      s.name = a.at("name").get<std::string>();
      s.values = a.at("values").get<std::vector<std::string>>();
      s.kind = attribute_kind_from_string(a.value("kind", std::string("conversational")));
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed schema entry: ") + e.what());
    }
    if (s.values.empty()) throw ParseError("attribute " + s.name + " has no values");
    std::set<std::string> seen(s.values.begin(), s.values.end());
    if (seen.size() != s.values.size()) throw ParseError("attribute " + s.name + " has duplicate values");
    if (!names.insert(s.name).second) throw ParseError("duplicate attribute: " + s.name);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<AttributeSchema> load_schema_file(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return schemas_from_json(j);
}

json record_to_json(const CorpusRecord& rec) {
  json j;
  j["id"] = rec.id;
  j["text"] = rec.text;
  j["source"] = rec.source;
  if (rec.created_at) j["created_at"] = *rec.created_at;
  if (rec.author_name) j["author_name"] = *rec.author_name;
  if (rec.author_pseudonym) j["author_pseudonym"] = *rec.author_pseudonym;
  if (rec.likes) j["likes"] = *rec.likes;
  j["gold_labels"] = rec.gold_labels;
  json pred = json::object();
  for (const auto& [attr, p] : rec.predicted_labels) pred[attr] = {{"value", p.value}, {"prob", p.prob}};
  j["predicted_labels"] = pred;
  json enr = json::object();
  if (rec.enriched.gender_pred) enr["gender_pred"] = *rec.enriched.gender_pred;
  if (!rec.enriched.ethnicity_path.empty()) enr["ethnicity_path"] = rec.enriched.ethnicity_path;
  if (rec.enriched.ethnicity_confidence) enr["ethnicity_confidence"] = *rec.enriched.ethnicity_confidence;
  j["enriched"] = enr;
  return j;
}

namespace {

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

}  // namespace

CorpusRecord record_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("record is not a JSON object");
  if (!j.contains("id")) throw ParseError("missing required field: id");
  if (!j.contains("text")) throw ParseError("missing required field: text");
  CorpusRecord r;
  try {
    r.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    r.text = j["text"].get<std::string>();
    r.source = canonical_source(j.value("source", std::string()));
    r.created_at = optional_field<std::string>(j, "created_at");
    r.author_name = optional_field<std::string>(j, "author_name");
    r.author_pseudonym = optional_field<std::string>(j, "author_pseudonym");
    r.likes = optional_field<std::int64_t>(j, "likes");
    if (j.contains("gold_labels") && !j["gold_labels"].is_null()) {
      r.gold_labels = j["gold_labels"].get<std::map<std::string, std::string>>();
    }
    if (j.contains("predicted_labels") && !j["predicted_labels"].is_null()) {
      for (const auto& [attr, p] : j["predicted_labels"].items()) {
        r.predicted_labels[attr] = PredictedLabel{p.at("value").get<std::string>(), p.at("prob").get<double>()};
      }
    }
    if (j.contains("enriched") && j["enriched"].is_object()) {
      const json& e = j["enriched"];
      r.enriched.gender_pred = optional_field<std::string>(e, "gender_pred");
      if (e.contains("ethnicity_path") && e["ethnicity_path"].is_array()) {
        r.enriched.ethnicity_path = e["ethnicity_path"].get<std::vector<std::string>>();
      }
      r.enriched.ethnicity_confidence = optional_field<double>(e, "ethnicity_confidence");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad field type: ") + e.what());
  }
  if (r.gold_labels.contains(std::string(kSourceAttribute))) {
    auto& v = r.gold_labels[std::string(kSourceAttribute)];
    v = canonical_source(v);
  }
  return r;
}

namespace {

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

void add_unique(Corpus& c, CorpusRecord rec, std::unordered_set<std::string>& ids, std::size_t line) {
  if (!ids.insert(rec.id).second) {
    throw ParseError("duplicate id: " + rec.id + ", line " + std::to_string(line));
  }
  c.records.push_back(std::move(rec));
}

}  // namespace

Corpus parse_jsonl(std::string_view content, std::vector<AttributeSchema> schemas) {
  Corpus c;
  c.schemas = std::move(schemas);
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    std::string_view line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? content.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    CorpusRecord rec;
    try {
      rec = record_from_json(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError(line_prefix(line_no) + "malformed JSON: " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(line_prefix(line_no) + e.what());
    }
    add_unique(c, std::move(rec), ids, line_no);
  }
  return c;
}

namespace {

constexpr std::string_view kCsvFixedColumns[] = {"id", "text", "source", "created_at", "author_pseudonym", "likes"};

}  // namespace

Corpus parse_csv_corpus(std::string_view content, std::vector<AttributeSchema> schemas) {
  Corpus c;
  c.schemas = std::move(schemas);
  auto rows = io::parse_csv(content);
  if (rows.empty()) return c;
  const auto& header = rows.front().fields;
  auto col = [&](std::string_view name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int id_col = col("id"), text_col = col("text");
  if (id_col < 0 || text_col < 0) throw ParseError("line 1: CSV header must contain id and text");
  const int source_col = col("source"), created_col = col("created_at"), pseudo_col = col("author_pseudonym"),
            likes_col = col("likes");
  std::vector<std::pair<int, std::string>> label_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto& h = header[i];
    if (std::find(std::begin(kCsvFixedColumns), std::end(kCsvFixedColumns), h) != std::end(kCsvFixedColumns)) continue;
    if (c.schema(h) == nullptr) throw ParseError("line 1: unknown column " + h);
    label_cols.emplace_back(static_cast<int>(i), h);
  }
  std::unordered_set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.size()) {
      throw ParseError(line_prefix(row.line) + "expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(row.fields.size()));
    }
    CorpusRecord rec;
    rec.id = row.fields[id_col];
    if (rec.id.empty()) throw ParseError(line_prefix(row.line) + "empty id");
    rec.text = row.fields[text_col];
    if (source_col >= 0) rec.source = canonical_source(row.fields[source_col]);
    if (created_col >= 0 && !row.fields[created_col].empty()) rec.created_at = row.fields[created_col];
    if (pseudo_col >= 0 && !row.fields[pseudo_col].empty()) rec.author_pseudonym = row.fields[pseudo_col];
    if (likes_col >= 0 && !row.fields[likes_col].empty()) {
      try {
        std::size_t used = 0;
        rec.likes = std::stoll(row.fields[likes_col], &used);
        if (used != row.fields[likes_col].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(line_prefix(row.line) + "likes is not an integer");
      }
    }
    for (const auto& [idx, attr] : label_cols) {
      if (!row.fields[idx].empty()) rec.gold_labels[attr] = row.fields[idx];
    }
    add_unique(c, std::move(rec), ids, row.line);
  }
  return c;
}

Corpus load_corpus(const fs::path& path, CorpusFormat format, const std::vector<AttributeSchema>* fallback_schemas) {
  std::vector<AttributeSchema> schemas;
  std::string provenance;
  fs::path sidecar = schema_sidecar_path(path);
  if (fs::exists(sidecar)) {
    json j;
    try {
      j = json::parse(io::read_file(sidecar));
    } catch (const json::parse_error& e) {
      throw ParseError(sidecar.string() + ": " + e.what());
    }
    schemas = schemas_from_json(j);
    provenance = j.value("provenance", std::string());
  } else if (fallback_schemas != nullptr) {
    schemas = *fallback_schemas;
  } else {
    schemas = default_schemas();
  }
  const std::string content = io::read_file(path);
  Corpus c;
  try {
    c = format == CorpusFormat::Csv ? parse_csv_corpus(content, std::move(schemas))
                                    : parse_jsonl(content, std::move(schemas));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  c.provenance = provenance;
  return c;
}

Corpus load_corpus(const fs::path& path) { return load_corpus(path, corpus_format_from_path(path)); }

namespace {

CorpusRecord prepare_for_write(const CorpusRecord& rec, const WriteOptions& opts) {
  CorpusRecord out = rec;
  if (opts.anonymize_on_write && out.author_name) {
    if (!opts.anonymization_key.empty()) out.author_pseudonym = pseudonym(*out.author_name, opts.anonymization_key);
    out.author_name.reset();
  }
  return out;
}

}  // namespace

std::string to_jsonl(const Corpus& corpus, WriteOptions opts) {
  std::string out;
  for (const auto& rec : corpus.records) {
    out += record_to_json(prepare_for_write(rec, opts)).dump();
    out.push_back('\n');
  }
  return out;
}

std::string to_csv(const Corpus& corpus) {
  io::CsvRow header(std::begin(kCsvFixedColumns), std::end(kCsvFixedColumns));
  std::vector<std::string> label_attrs;
  for (const auto& s : corpus.schemas) {
    if (s.name == kSourceAttribute) continue;
    header.push_back(s.name);
    label_attrs.push_back(s.name);
  }
  std::string out = io::csv_join(header) + "\n";
  for (const auto& r : corpus.records) {
    io::CsvRow row{r.id,
                   r.text,
                   r.source,
                   r.created_at.value_or(""),
                   r.author_pseudonym.value_or(""),
                   r.likes ? std::to_string(*r.likes) : std::string()};
    for (const auto& a : label_attrs) {
      auto it = r.gold_labels.find(a);
      row.push_back(it == r.gold_labels.end() ? std::string() : it->second);
    }
    out += io::csv_join(row) + "\n";
  }
  return out;
}

void write_corpus(const Corpus& corpus, const fs::path& path, CorpusFormat format, WriteOptions opts) {
  json sidecar = schemas_to_json(corpus.schemas);
  if (!corpus.provenance.empty()) sidecar["provenance"] = corpus.provenance;
  io::write_file_atomic(schema_sidecar_path(path), sidecar.dump(2) + "\n");
  io::write_file_atomic(path, format == CorpusFormat::Csv ? to_csv(corpus) : to_jsonl(corpus, opts));
}

void write_corpus(const Corpus& corpus, const fs::path& path, WriteOptions opts) {
  write_corpus(corpus, path, corpus_format_from_path(path), opts);
}

std::string pseudonym(std::string_view author_name, std::string_view key) {
  if (key.empty()) throw ValidationError("anonymization key must not be empty");
  return text::hmac_sha256_hex(key, text::normalize_name(author_name)).substr(0, 16);
}

Corpus anonymize(const Corpus& corpus, std::string_view key) {
  if (key.empty()) throw ValidationError("anonymization key must not be empty");
  Corpus out = corpus;
  for (auto& r : out.records) {
    if (!r.author_name) continue;
    r.author_pseudonym = pseudonym(*r.author_name, key);
    r.author_name.reset();
  }
  return out;
}

std::vector<Violation> validate(const Corpus& corpus) {
  std::vector<Violation> out;
  std::unordered_set<std::string> ids;
  const AttributeSchema* source_schema = corpus.schema(kSourceAttribute);
  for (const auto& r : corpus.records) {
    if (r.id.empty()) out.push_back({r.id, "id", "empty id"});
    if (!ids.insert(r.id).second) out.push_back({r.id, "id", "duplicate id"});
    if (source_schema != nullptr && !r.source.empty() && !source_schema->contains(r.source)) {
      out.push_back({r.id, "source", "value \"" + r.source + "\" not in schema Source"});
    }
    if (r.likes && *r.likes < 0) out.push_back({r.id, "likes", "negative likes"});
    for (const auto& [attr, value] : r.gold_labels) {
      const AttributeSchema* s = corpus.schema(attr);
      if (s == nullptr) {
        out.push_back({r.id, "gold_labels." + attr, "unknown attribute"});
      } else if (!s->contains(value)) {
        out.push_back({r.id, "gold_labels." + attr, "value \"" + value + "\" not in schema " + attr});
      }
    }
    for (const auto& [attr, p] : r.predicted_labels) {
      const AttributeSchema* s = corpus.schema(attr);
      if (s == nullptr) {
        out.push_back({r.id, "predicted_labels." + attr, "unknown attribute"});
      } else if (!s->contains(p.value)) {
        out.push_back({r.id, "predicted_labels." + attr, "value \"" + p.value + "\" not in schema " + attr});
      }
      if (!(p.prob >= 0.0 && p.prob <= 1.0)) {
        out.push_back({r.id, "predicted_labels." + attr, "probability outside [0,1]"});
      }
    }
    if (r.enriched.ethnicity_path.size() > 3) {
      out.push_back({r.id, "enriched.ethnicity_path", "more than 3 levels"});
    }
    if (r.enriched.ethnicity_confidence &&
        !(*r.enriched.ethnicity_confidence >= 0.0 && *r.enriched.ethnicity_confidence <= 1.0)) {
      out.push_back({r.id, "enriched.ethnicity_confidence", "confidence outside [0,1]"});
    }
    if (r.enriched.gender_pred) {
      const auto& g = *r.enriched.gender_pred;
      if (g != "Male" && g != "Female" && g != "Unknown") {
        out.push_back({r.id, "enriched.gender_pred", "value \"" + g + "\" not one of Male, Female, Unknown"});
      }
    }
  }
  return out;
}

}  // namespace enrich
