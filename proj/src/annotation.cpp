#include "enrich/annotation.hpp"

#include <algorithm>
#include <mutex>
#include <set>

#include "enrich/io.hpp"

namespace enrich {

using nlohmann::json;

json to_json(const AnnotationEvent& e) {
  return {{"item_id", e.item_id},
          {"annotator", e.annotator_id},
          {"attribute", e.attribute},
          {"value", e.value},
          {"timestamp", e.timestamp_ms}};
}

AnnotationEvent annotation_event_from_json(const json& j) {
  try {
    AnnotationEvent e;
    e.item_id = j.at("item_id").get<std::string>();
    e.annotator_id = j.at("annotator").get<std::string>();
    e.attribute = j.at("attribute").get<std::string>();
    e.value = j.at("value").get<std::string>();
    e.timestamp_ms = j.value("timestamp", std::int64_t{0});
    return e;
  } catch (const json::exception& ex) {
    throw ParseError(std::string("malformed annotation event: ") + ex.what());
  }
}

AnnotationStore::AnnotationStore(Corpus items) : items_(std::move(items)) {
  for (const auto& r : items_.records) sorted_ids_.push_back(r.id);
  std::sort(sorted_ids_.begin(), sorted_ids_.end());
}

AnnotationStore::AnnotationStore(Corpus items, std::filesystem::path log_path) : AnnotationStore(std::move(items)) {
  if (std::filesystem::exists(log_path)) {
    const std::string content = io::read_file(log_path);
    std::size_t pos = 0, line = 0;
    while (pos < content.size()) {
      auto nl = content.find('\n', pos);
      std::string_view l(content.data() + pos, (nl == std::string::npos ? content.size() : nl) - pos);
      pos = nl == std::string::npos ? content.size() : nl + 1;
      ++line;
      if (l.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      AnnotationEvent e;
      try {
        e = annotation_event_from_json(json::parse(l));
        check_event(e);
      } catch (const std::exception& ex) {
        throw ParseError(log_path.string() + ": line " + std::to_string(line) + ": " + ex.what());
      }
      apply(e, log_.size());
      log_.push_back(std::move(e));
    }
  }
  log_path_ = std::move(log_path);
}

void AnnotationStore::check_event(const AnnotationEvent& e) const {
  if (e.annotator_id.empty()) throw LabelRejected("empty annotator id");
  if (items_.find(e.item_id) == nullptr) throw LabelRejected("unknown item: " + e.item_id);
  const AttributeSchema* s = items_.schema(e.attribute);
  if (s == nullptr) throw LabelRejected("unknown attribute: " + e.attribute);
  if (!s->contains(e.value)) throw LabelRejected("value \"" + e.value + "\" not allowed for " + e.attribute);
}

void AnnotationStore::apply(const AnnotationEvent& e, std::size_t seq) {
  Key key{e.item_id, e.annotator_id, e.attribute};
  auto it = cells_.find(key);
  if (it != cells_.end()) {
    const Cell& c = it->second;
    if (std::pair(e.timestamp_ms, seq) < std::pair(c.timestamp_ms, c.seq)) return;
  }
  cells_[key] = Cell{e.value, e.timestamp_ms, seq};
}

void AnnotationStore::record_label(const AnnotationEvent& event) {
  check_event(event);
  std::unique_lock lock(mu_);
  if (log_path_) io::append_line(*log_path_, to_json(event).dump());
  apply(event, log_.size());
  log_.push_back(event);
}

std::optional<std::string> AnnotationStore::current(std::string_view item_id, std::string_view annotator_id,
                                                    std::string_view attribute) const {
  std::shared_lock lock(mu_);
  auto it = cells_.find(Key{std::string(item_id), std::string(annotator_id), std::string(attribute)});
  if (it == cells_.end()) return std::nullopt;
  return it->second.value;
}

std::vector<AnnotationEvent> AnnotationStore::log() const {
  std::shared_lock lock(mu_);
  return log_;
}

std::vector<std::string> AnnotationStore::annotators() const {
  std::shared_lock lock(mu_);
  std::set<std::string> names;
  for (const auto& [key, _] : cells_) names.insert(std::get<1>(key));
  return {names.begin(), names.end()};
}

std::vector<std::string> AnnotationStore::annotatable_attributes() const {
  std::vector<std::string> out;
  for (const auto& s : items_.schemas) {
    if (s.kind != AttributeKind::Source) out.push_back(s.name);
  }
  return out;
}

std::map<std::string, std::map<std::string, std::string>> AnnotationStore::labels_for(
    std::string_view attribute) const {
  std::shared_lock lock(mu_);
  std::map<std::string, std::map<std::string, std::string>> out;
  for (const auto& [key, cell] : cells_) {
    if (std::get<2>(key) == attribute) out[std::get<0>(key)][std::get<1>(key)] = cell.value;
  }
  return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> AnnotationStore::co_labeled(
    std::string_view attribute, std::string_view first, std::string_view second) const {
  std::pair<std::vector<std::string>, std::vector<std::string>> out;
  for (const auto& [item, by_annotator] : labels_for(attribute)) {
    auto a = by_annotator.find(std::string(first));
    auto b = by_annotator.find(std::string(second));
    if (a == by_annotator.end() || b == by_annotator.end()) continue;
    out.first.push_back(a->second);
    out.second.push_back(b->second);
  }
  return out;
}

bool AnnotationStore::fully_labeled(const std::string& item, std::string_view annotator) const {
  for (const auto& attr : annotatable_attributes()) {
    if (!cells_.contains(Key{item, std::string(annotator), attr})) return false;
  }
  return true;
}

std::optional<CorpusRecord> AnnotationStore::next_task(std::string_view annotator_id) const {
  std::shared_lock lock(mu_);
  for (const auto& id : sorted_ids_) {
    if (!fully_labeled(id, annotator_id)) return *items_.find(id);
  }
  return std::nullopt;
}

Progress AnnotationStore::progress(std::string_view annotator_id) const {
  std::shared_lock lock(mu_);
  Progress p;
  p.total = sorted_ids_.size();
  for (const auto& id : sorted_ids_) {
    if (fully_labeled(id, annotator_id)) ++p.labeled;
  }
  return p;
}

double percent_agreement(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) throw ValidationError("label lists differ in length");
  if (a.empty()) throw ValidationError("no overlap");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(a.size());
}

double cohens_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  const double po = percent_agreement(a, b);
  std::map<std::string, std::pair<std::size_t, std::size_t>> marginals;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++marginals[a[i]].first;
    ++marginals[b[i]].second;
  }
  const auto n = static_cast<double>(a.size());
  double pe = 0.0;
  for (const auto& [c, m] : marginals) pe += (static_cast<double>(m.first) / n) * (static_cast<double>(m.second) / n);
  if (pe >= 1.0) return 1.0;  // single shared category, so po == 1 as well
  return (po - pe) / (1.0 - pe);
}

double percent_agreement(const AnnotationStore& store, std::string_view attribute,
                         std::pair<std::string, std::string> annotators) {
  auto [a, b] = store.co_labeled(attribute, annotators.first, annotators.second);
  return percent_agreement(a, b);
}

double cohens_kappa(const AnnotationStore& store, std::string_view attribute,
                    std::pair<std::string, std::string> annotators) {
  auto [a, b] = store.co_labeled(attribute, annotators.first, annotators.second);
  return cohens_kappa(a, b);
}

json to_json(const AgreementReport& r) {
  return {{"attribute", r.attribute},
          {"annotator_pair", {r.annotator_pair.first, r.annotator_pair.second}},
          {"n_items", r.n_items},
          {"percent_agreement", r.percent_agreement},
          {"kappa", r.kappa}};
}

json to_json(const AgreementSummary& s) {
  json pairs = json::array();
  for (const auto& p : s.pairs) pairs.push_back(to_json(p));
  return {{"attribute", s.attribute}, {"pairs", pairs}, {"mean_kappa", s.mean_kappa ? json(*s.mean_kappa) : json()}};
}

AgreementSummary agreement_summary(const AnnotationStore& store, std::string_view attribute) {
  store.corpus().require_schema(attribute);
  AgreementSummary s;
  s.attribute = std::string(attribute);
  const auto names = store.annotators();
  double kappa_sum = 0.0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      auto [a, b] = store.co_labeled(attribute, names[i], names[j]);
      if (a.empty()) continue;
      AgreementReport r{s.attribute, {names[i], names[j]}, a.size(), percent_agreement(a, b), cohens_kappa(a, b)};
      kappa_sum += r.kappa;
      s.pairs.push_back(std::move(r));
    }
  }
  if (!s.pairs.empty()) s.mean_kappa = kappa_sum / static_cast<double>(s.pairs.size());
  return s;
}

AdjudicationPolicy adjudication_policy_from_string(std::string_view s) {
  if (s == "majority") return AdjudicationPolicy::Majority;
  if (s == "strict_unanimous" || s == "strict-unanimous" || s == "unanimous") return AdjudicationPolicy::StrictUnanimous;
  throw ValidationError("unknown adjudication policy: " + std::string(s));
}

AdjudicationResult adjudicate(const AnnotationStore& store, std::string_view attribute, AdjudicationPolicy policy) {
  AdjudicationResult out;
  for (const auto& [item, by_annotator] : store.labels_for(attribute)) {
    std::map<std::string, std::size_t> votes;
    for (const auto& [_, v] : by_annotator) ++votes[v];
    if (policy == AdjudicationPolicy::StrictUnanimous) {
      if (votes.size() == 1) {
        out.gold[item] = votes.begin()->first;
      } else {
        out.unresolved.push_back(item);
      }
      continue;
    }
    std::size_t top = 0, top_count = 0;
    std::string winner;
    for (const auto& [v, n] : votes) {
      if (n > top) {
        top = n;
        top_count = 1;
        winner = v;
      } else if (n == top) {
        ++top_count;
      }
    }
    if (top_count == 1) {
      out.gold[item] = winner;
    } else {
      out.unresolved.push_back(item);
    }
  }
  return out;
}

Corpus apply_gold(const Corpus& corpus, std::string_view attribute, const AdjudicationResult& result) {
  Corpus out = corpus;
  for (auto& r : out.records) {
    auto it = result.gold.find(r.id);
    if (it != result.gold.end()) r.gold_labels[std::string(attribute)] = it->second;
  }
  return out;
}

}  // namespace enrich
