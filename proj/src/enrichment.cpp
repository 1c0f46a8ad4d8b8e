#include "enrich/enrichment.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "enrich/error.hpp"
#include "enrich/io.hpp"
#include "enrich/text.hpp"

namespace enrich {

using nlohmann::json;

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::Male:
      return "Male";
    case Gender::Female:
      return "Female";
    case Gender::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

void NameGenderDB::add(std::string_view name, char sex, std::uint64_t count) {
  std::string key = text::to_lower(text::nfc(name));
  if (key.empty()) throw ValidationError("empty name");
  NameCounts& c = counts_[key];
  if (sex == 'F') {
    c.female += count;
  } else if (sex == 'M') {
    c.male += count;
  } else {
    throw ValidationError(std::string("sex must be F or M, got ") + sex);
  }
}

std::optional<NameCounts> NameGenderDB::lookup(std::string_view given_name) const {
  auto it = counts_.find(text::to_lower(text::nfc(given_name)));
  if (it == counts_.end() || it->second.female + it->second.male == 0) return std::nullopt;
  return it->second;
}

NameGenderDB parse_name_db(std::string_view csv) {
  NameGenderDB db;
  for (const auto& row : io::parse_csv(csv)) {
    const auto& f = row.fields;
    const std::string where = "line " + std::to_string(row.line) + ": ";
    if (f.size() != 3 && f.size() != 4) throw ParseError(where + "expected name,sex,count");
    if (f[1] != "F" && f[1] != "M") throw ParseError(where + "sex must be F or M, got \"" + f[1] + "\"");
    std::uint64_t count = 0;
    try {
      std::size_t used = 0;
      if (f[2].empty() || f[2][0] == '-') throw std::invalid_argument("negative");
      count = std::stoull(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(where + "count is not a non-negative integer: \"" + f[2] + "\"");
    }
    if (f[0].empty()) throw ParseError(where + "empty name");
    db.add(f[0], f[1][0], count);
  }
  return db;
}

NameGenderDB load_name_db(const std::filesystem::path& path) {
  try {
    return parse_name_db(io::read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Gender infer_gender(std::string_view full_name, const NameGenderDB& db, double threshold) {
  if (!(threshold > 0.5 && threshold <= 1.0)) throw ValidationError("gender threshold must be in (0.5, 1]");
  auto counts = db.lookup(text::given_name(full_name));
  if (!counts) return Gender::Unknown;
  const double total = static_cast<double>(counts->female) + static_cast<double>(counts->male);
  const double f = static_cast<double>(counts->female) / total;
  if (f >= threshold) return Gender::Female;
  if (1.0 - f >= threshold) return Gender::Male;
  return Gender::Unknown;
}

const std::vector<std::vector<std::string>>& ethnicity_taxonomy() {
  static const std::vector<std::vector<std::string>> kLeaves = {
      {"Asian", "GreaterEastAsian", "EastAsian"},
      {"Asian", "GreaterEastAsian", "Japanese"},
      {"Asian", "IndianSubContinent"},
      {"GreaterAfrican", "Africans"},
      {"GreaterAfrican", "Muslim"},
      {"GreaterEuropean", "British"},
      {"GreaterEuropean", "EastEuropean"},
      {"GreaterEuropean", "Jewish"},
      {"GreaterEuropean", "WestEuropean", "French"},
      {"GreaterEuropean", "WestEuropean", "Germanic"},
      {"GreaterEuropean", "WestEuropean", "Hispanic"},
      {"GreaterEuropean", "WestEuropean", "Italian"},
      {"GreaterEuropean", "WestEuropean", "Nordic"},
  };
  return kLeaves;
}

std::string EthnicityPath::joined() const {
  std::string out;
  for (const auto& l : levels) {
    if (!out.empty()) out.push_back('-');
    out += l;
  }
  return out;
}

bool is_valid_path(std::span<const std::string> levels) {
  if (levels.empty() || levels.size() > 3) return false;
  if (levels.size() == 1 && levels[0] == kUnknown) return true;
  for (const auto& leaf : ethnicity_taxonomy()) {
    if (levels.size() <= leaf.size() && std::equal(levels.begin(), levels.end(), leaf.begin())) return true;
  }
  return false;
}

EthnicityPath parse_ethnicity_path(std::string_view path, double confidence) {
  const char sep = path.find(',') != std::string_view::npos ? ',' : '-';
  std::vector<std::string> levels;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto end = path.find(sep, start);
    std::string part(path.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    auto b = part.find_first_not_of(' ');
    auto e = part.find_last_not_of(' ');
    levels.push_back(b == std::string::npos ? std::string() : part.substr(b, e - b + 1));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  if (!is_valid_path(levels)) return EthnicityPath{};
  return EthnicityPath{std::move(levels), std::clamp(confidence, 0.0, 1.0)};
}

EthnicityPath ethnicity_from_response(const json& body, double cutoff) {
  if (!body.is_object() || body.empty()) return EthnicityPath{};
  std::string best;
  double best_p = -1.0;
  for (const auto& [path, p] : body.items()) {
    if (!p.is_number()) continue;
    const double v = p.get<double>();
    if (v > best_p || (v == best_p && path < best)) {
      best = path;
      best_p = v;
    }
  }
  if (best_p < cutoff) return EthnicityPath{{std::string(kUnknown)}, std::max(best_p, 0.0)};
  return parse_ethnicity_path(best, best_p);
}

std::vector<EthnicityPath> EthnicityProvider::lookup_many(std::span<const std::string> normalized_names) {
  std::vector<EthnicityPath> out;
  out.reserve(normalized_names.size());
  for (const auto& n : normalized_names) out.push_back(lookup(n));
  return out;
}

LocalEthnicityProvider::LocalEthnicityProvider(TrainedModel model, double cutoff)
    : model_(std::move(model)), cutoff_(cutoff) {}

FeatureConfig LocalEthnicityProvider::feature_config() {
  FeatureConfig cfg;
  cfg.analyzer = Analyzer::Char;
  cfg.n_min = 2;
  cfg.n_max = 4;
  cfg.min_df = 1;
  return cfg;
}

Hyperparams LocalEthnicityProvider::default_hyperparams() {
  Hyperparams h;
  h.lambda = 0.01;
  return h;
}

LocalEthnicityProvider LocalEthnicityProvider::train(std::span<const std::pair<std::string, std::string>> examples,
                                                     const Hyperparams& hyper) {
  if (examples.empty()) throw ValidationError("ethnicity training data is empty");
  std::vector<std::string> names, labels;
  for (const auto& [name, path] : examples) {
    EthnicityPath p = parse_ethnicity_path(path, 1.0);
    if (p.unknown() || p.levels.size() < 2) {
      throw ValidationError("training label \"" + path + "\" is not a taxonomy leaf");
    }
    names.push_back(text::normalize_name(name));
    labels.push_back(p.joined());
  }
  std::vector<std::string> order;
  for (const auto& leaf : ethnicity_taxonomy()) order.push_back(EthnicityPath{leaf, 1.0}.joined());
  Vocabulary vocab = build_vocab(names, feature_config());
  SparseMatrix x = vectorize_all(names, vocab);
  return LocalEthnicityProvider(enrich::train("ethnicity", std::move(vocab), x, labels, order, hyper));
}

std::vector<std::pair<std::string, std::string>> load_ethnicity_training(const std::filesystem::path& csv) {
  std::vector<std::pair<std::string, std::string>> out;
  auto rows = io::parse_csv(io::read_file(csv));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    if (i == 0 && f.size() == 2 && f[0] == "name") continue;
    if (f.size() != 2) {
      throw ParseError(csv.string() + ": line " + std::to_string(rows[i].line) + ": expected name,path");
    }
    out.emplace_back(f[0], f[1]);
  }
  return out;
}

LocalEthnicityProvider LocalEthnicityProvider::train_from_file(const std::filesystem::path& csv,
                                                               const Hyperparams& hyper) {
  return train(load_ethnicity_training(csv), hyper);
}

EthnicityPath LocalEthnicityProvider::lookup(const std::string& normalized_name) {
  if (normalized_name.empty()) return EthnicityPath{};
  Prediction p = model_.predict_text(normalized_name);
  if (p.prob < cutoff_) return EthnicityPath{{std::string(kUnknown)}, p.prob};
  return parse_ethnicity_path(p.value, p.prob);
}

std::size_t EnrichmentSummary::ethnicity_total() const {
  std::size_t n = 0;
  for (const auto& [_, c] : ethnicity) n += c;
  return n;
}

std::size_t EnrichmentSummary::gender_total() const {
  std::size_t n = 0;
  for (const auto& [_, c] : gender) n += c;
  return n;
}

EnrichmentSummary summarize_enrichment(const Corpus& corpus) {
  EnrichmentSummary s;
  for (const auto& r : corpus.records) {
    const std::string eth =
        r.enriched.ethnicity_path.empty() ? std::string(kUnknown) : EthnicityPath{r.enriched.ethnicity_path, 0}.joined();
    ++s.ethnicity[eth];
    ++s.gender[r.enriched.gender_pred.value_or(std::string(kUnknown))];
  }
  return s;
}

std::vector<std::pair<std::string, std::size_t>> enrichment_rows(const EnrichmentSummary& s) {
  auto count = [](const std::map<std::string, std::size_t>& m, const std::string& k) -> std::size_t {
    auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
  };
  std::vector<std::pair<std::string, std::size_t>> rows;
  std::set<std::string> listed{std::string(kUnknown)};
  rows.emplace_back("Ethnicity=Unknown", count(s.ethnicity, std::string(kUnknown)));
  for (const auto& leaf : ethnicity_taxonomy()) {
    std::string key = EthnicityPath{leaf, 0}.joined();
    listed.insert(key);
    rows.emplace_back(key, count(s.ethnicity, key));
  }
  for (const auto& [k, c] : s.ethnicity) {
    if (!listed.contains(k)) rows.emplace_back(k, c);
  }
  for (const char* g : {"Male", "Female", "Unknown"}) rows.emplace_back(std::string("Gender=") + g, count(s.gender, g));
  for (const auto& [k, c] : s.gender) {
    if (k != "Male" && k != "Female" && k != "Unknown") rows.emplace_back("Gender=" + k, c);
  }
  return rows;
}

std::string render_enrichment_table(std::span<const std::pair<std::string, EnrichmentSummary>> datasets) {
  // Row labels are the union over datasets, in the first dataset's order.
  std::vector<std::string> labels;
  std::vector<std::map<std::string, std::size_t>> columns;
  std::set<std::string> seen;
  for (const auto& [name, summary] : datasets) {
    std::map<std::string, std::size_t> col;
    for (const auto& [label, c] : enrichment_rows(summary)) {
      col[label] = c;
      if (seen.insert(label).second) labels.push_back(label);
    }
    columns.push_back(std::move(col));
  }
  // Gender rows go last even when an extra path first appears in a later dataset.
  std::stable_partition(labels.begin(), labels.end(), [](const std::string& l) { return !l.starts_with("Gender="); });

  std::size_t width = std::string_view("Ethnicity/Gender").size();
  for (const auto& l : labels) width = std::max(width, l.size());
  std::vector<std::size_t> col_width;
  for (const auto& [name, _] : datasets) col_width.push_back(std::max<std::size_t>(name.size(), 7));

  auto pad_right = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  auto pad_left = [](const std::string& s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };

  std::string out = pad_right("Ethnicity/Gender", width);
  for (std::size_t d = 0; d < datasets.size(); ++d) out += "  " + pad_left(datasets[d].first, col_width[d]);
  out += "\n";
  bool gender_started = false;
  for (const auto& l : labels) {
    if (!gender_started && l.starts_with("Gender=")) {
      gender_started = true;
      out += std::string(width + datasets.size() * 2 + [&] {
        std::size_t w = 0;
        for (auto c : col_width) w += c;
        return w;
      }(), '-') + "\n";
    }
    out += pad_right(l, width);
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      auto it = columns[d].find(l);
      out += "  " + pad_left(std::to_string(it == columns[d].end() ? 0 : it->second), col_width[d]);
    }
    out += "\n";
  }
  return out;
}

EnrichResult enrich(const Corpus& corpus, const NameGenderDB& db, EthnicityProvider& provider, double threshold) {
  EnrichResult out{corpus, {}};
  std::vector<std::string> unique_names;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::string> normalized(corpus.records.size());
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const auto& r = corpus.records[i];
    if (!r.author_name) continue;
    normalized[i] = text::normalize_name(*r.author_name);
    if (normalized[i].empty()) continue;
    if (slot.emplace(normalized[i], unique_names.size()).second) unique_names.push_back(normalized[i]);
  }
  const std::vector<EthnicityPath> paths = provider.lookup_many(unique_names);
  for (std::size_t i = 0; i < out.corpus.records.size(); ++i) {
    auto& r = out.corpus.records[i];
    if (normalized[i].empty()) {
      r.enriched.gender_pred = std::string(kUnknown);
      r.enriched.ethnicity_path = {std::string(kUnknown)};
      r.enriched.ethnicity_confidence = 0.0;
      continue;
    }
    r.enriched.gender_pred = std::string(to_string(infer_gender(normalized[i], db, threshold)));
    const EthnicityPath& p = paths[slot.at(normalized[i])];
    r.enriched.ethnicity_path = p.levels;
    r.enriched.ethnicity_confidence = p.confidence;
  }
  out.summary = summarize_enrichment(out.corpus);
  return out;
}

}  // namespace enrich
