#include "enrich/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "enrich/enrichment.hpp"
#include "enrich/error.hpp"
#include "enrich/io.hpp"

namespace enrich {

using nlohmann::json;

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Known labels first, then everything else observed, sorted.
std::vector<std::string> with_observed(std::vector<std::string> known, const std::set<std::string>& observed) {
  std::set<std::string> listed(known.begin(), known.end());
  for (const auto& v : observed) {
    if (!listed.contains(v)) known.push_back(v);
  }
  return known;
}

bool is_abstention(std::string_view v) { return v == "Unknown" || v == "Uncommitted" || v == "Undetermined"; }

}  // namespace

LabelSource label_source_from_string(std::string_view s) {
  if (s == "gold") return LabelSource::Gold;
  if (s == "predicted") return LabelSource::Predicted;
  if (s == "auto") return LabelSource::Auto;
  throw ValidationError("label source must be gold, predicted or auto, got \"" + std::string(s) + "\"");
}

std::string AttributeRef::display_name() const {
  switch (kind) {
    case Kind::EnrichedGender:
      return "Gender";
    case Kind::EnrichedEthnicity:
      return "Ethnicity";
    case Kind::Label:
      break;
  }
  return attribute;
}

AttributeRef parse_attribute_ref(std::string_view s, LabelSource fallback) {
  AttributeRef ref;
  if (s == "enriched.gender") {
    ref.kind = AttributeRef::Kind::EnrichedGender;
  } else if (s == "enriched.ethnicity") {
    ref.kind = AttributeRef::Kind::EnrichedEthnicity;
  } else if (s.starts_with("gold.")) {
    ref.attribute = s.substr(5);
    ref.which = LabelSource::Gold;
  } else if (s.starts_with("predicted.")) {
    ref.attribute = s.substr(10);
    ref.which = LabelSource::Predicted;
  } else {
    ref.attribute = s;
    ref.which = fallback;
  }
  if (ref.kind == AttributeRef::Kind::Label && ref.attribute.empty()) throw ValidationError("empty attribute name");
  return ref;
}

AttributeRef resolve(const AttributeRef& ref, const Corpus& corpus) {
  if (ref.kind != AttributeRef::Kind::Label) return ref;
  if (corpus.schema(ref.attribute) == nullptr) throw ValidationError("unknown attribute: " + ref.attribute);
  AttributeRef out = ref;
  if (out.which == LabelSource::Auto && corpus.schema(ref.attribute)->kind == AttributeKind::Source) {
    out.which = LabelSource::Gold;
  } else if (out.which == LabelSource::Auto) {
    const bool any_pred = std::any_of(corpus.records.begin(), corpus.records.end(),
                                      [&](const CorpusRecord& r) { return r.predicted_labels.contains(ref.attribute); });
    out.which = any_pred ? LabelSource::Predicted : LabelSource::Gold;
  }
  return out;
}

std::optional<std::string> ref_value(const CorpusRecord& rec, const AttributeRef& ref) {
  switch (ref.kind) {
    case AttributeRef::Kind::EnrichedGender:
      return rec.enriched.gender_pred;
    case AttributeRef::Kind::EnrichedEthnicity:
      if (rec.enriched.ethnicity_path.empty()) return std::nullopt;
      return EthnicityPath{rec.enriched.ethnicity_path, 0.0}.joined();
    case AttributeRef::Kind::Label:
      break;
  }
  if (ref.which == LabelSource::Predicted) return predicted_value(rec, ref.attribute);
  if (ref.which == LabelSource::Gold) return gold_value(rec, ref.attribute);
  // Unresolved Auto: prefer the prediction.
  if (auto p = predicted_value(rec, ref.attribute)) return p;
  return gold_value(rec, ref.attribute);
}

std::vector<std::string> ref_labels(const Corpus& corpus, const AttributeRef& ref) {
  std::set<std::string> observed;
  for (const auto& r : corpus.records) {
    if (auto v = ref_value(r, ref)) observed.insert(*v);
  }
  std::vector<std::string> known;
  switch (ref.kind) {
    case AttributeRef::Kind::EnrichedGender:
      known = {"Female", "Male", "Unknown"};
      break;
    case AttributeRef::Kind::EnrichedEthnicity:
      known.emplace_back(kUnknown);
      for (const auto& leaf : ethnicity_taxonomy()) known.push_back(EthnicityPath{leaf, 0.0}.joined());
      break;
    case AttributeRef::Kind::Label:
      known = corpus.require_schema(ref.attribute).values;
      break;
  }
  return with_observed(std::move(known), observed);
}

std::uint64_t LabelCounts::total() const {
  std::uint64_t n = missing;
  for (const auto& [_, c] : counts) n += c;
  return n;
}

std::uint64_t LabelCounts::count(std::string_view value) const {
  for (const auto& [v, c] : counts) {
    if (v == value) return c;
  }
  return 0;
}

std::vector<LabelCounts> label_counts(const Corpus& corpus, std::span<const std::string> attributes,
                                      LabelSource which) {
  std::vector<LabelCounts> out;
  for (const auto& attr : attributes) {
    AttributeRef ref = resolve(AttributeRef{AttributeRef::Kind::Label, attr, which}, corpus);
    LabelCounts lc{attr, {}, 0};
    std::vector<std::string> labels = ref_labels(corpus, ref);
    std::map<std::string, std::uint64_t> tally;
    for (const auto& r : corpus.records) {
      if (auto v = ref_value(r, ref)) {
        ++tally[*v];
      } else {
        ++lc.missing;
      }
    }
    for (const auto& l : labels) lc.counts.emplace_back(l, tally[l]);
    out.push_back(std::move(lc));
  }
  return out;
}

std::uint64_t CrossTab::row_total(std::size_t r) const {
  std::uint64_t n = 0;
  for (auto c : counts.at(r)) n += c;
  return n;
}

std::uint64_t CrossTab::total() const {
  std::uint64_t n = 0;
  for (std::size_t r = 0; r < counts.size(); ++r) n += row_total(r);
  return n;
}

std::vector<std::string> CrossTab::zero_rows() const {
  std::vector<std::string> out;
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    if (row_total(r) == 0) out.push_back(row_labels[r]);
  }
  return out;
}

std::vector<double> CrossTab::column_marginals() const {
  std::vector<double> m(col_labels.size(), 0.0);
  const std::uint64_t n = total();
  if (n == 0) return m;
  for (std::size_t c = 0; c < col_labels.size(); ++c) {
    std::uint64_t col = 0;
    for (const auto& row : counts) col += row[c];
    m[c] = static_cast<double>(col) / static_cast<double>(n);
  }
  return m;
}

CrossTab make_cross_tab(std::string row_attr, std::string col_attr, std::vector<std::string> row_labels,
                        std::vector<std::string> col_labels, std::vector<std::vector<std::uint64_t>> counts) {
  if (counts.size() != row_labels.size()) throw ValidationError("cross tab: row count mismatch");
  for (const auto& row : counts) {
    if (row.size() != col_labels.size()) throw ValidationError("cross tab: column count mismatch");
  }
  CrossTab t{std::move(row_attr), std::move(col_attr), std::move(row_labels), std::move(col_labels),
             std::move(counts), {}};
  t.proportions.assign(t.row_labels.size(), std::vector<double>(t.col_labels.size(), 0.0));
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    const std::uint64_t n = t.row_total(r);
    if (n == 0) continue;
    for (std::size_t c = 0; c < t.col_labels.size(); ++c) {
      t.proportions[r][c] = static_cast<double>(t.counts[r][c]) / static_cast<double>(n);
    }
  }
  return t;
}

CrossTab cross_tab(const Corpus& corpus, const AttributeRef& rows, const AttributeRef& cols,
                   const CrossTabOptions& opts) {
  const AttributeRef r = resolve(rows, corpus);
  const AttributeRef c = resolve(cols, corpus);
  std::vector<std::string> row_labels = ref_labels(corpus, r);
  std::vector<std::string> col_labels = opts.col_values.empty() ? ref_labels(corpus, c) : opts.col_values;
  std::map<std::string, std::size_t> row_at, col_at;
  for (std::size_t i = 0; i < row_labels.size(); ++i) row_at.emplace(row_labels[i], i);
  for (std::size_t i = 0; i < col_labels.size(); ++i) col_at.emplace(col_labels[i], i);

  std::vector<std::vector<std::uint64_t>> counts(row_labels.size(), std::vector<std::uint64_t>(col_labels.size(), 0));
  for (const auto& rec : corpus.records) {
    auto rv = ref_value(rec, r);
    auto cv = ref_value(rec, c);
    if (!rv || !cv) continue;
    auto ci = col_at.find(*cv);
    if (ci == col_at.end()) continue;
    ++counts[row_at.at(*rv)][ci->second];
  }
  return make_cross_tab(r.display_name(), c.display_name(), std::move(row_labels), std::move(col_labels),
                        std::move(counts));
}

CrossTab cross_tab_from_counts(const LabelCounts& counts, std::string row_label) {
  std::vector<std::string> cols;
  std::vector<std::uint64_t> row;
  for (const auto& [v, c] : counts.counts) {
    cols.push_back(v);
    row.push_back(c);
  }
  return make_cross_tab("", counts.attribute, {std::move(row_label)}, std::move(cols), {std::move(row)});
}

TableFormat table_format_from_string(std::string_view s) {
  if (s == "text") return TableFormat::Text;
  if (s == "csv") return TableFormat::Csv;
  if (s == "markdown" || s == "md") return TableFormat::Markdown;
  if (s == "json") return TableFormat::Json;
  throw ValidationError("format must be text, csv, markdown or json, got \"" + std::string(s) + "\"");
}

json to_json(const CrossTab& t) {
  return json{{"row_attr", t.row_attr},     {"col_attr", t.col_attr}, {"row_labels", t.row_labels},
              {"col_labels", t.col_labels}, {"counts", t.counts},     {"proportions", t.proportions}};
}

CrossTab cross_tab_from_json(const json& j) {
  try {
    return make_cross_tab(j.at("row_attr").get<std::string>(), j.at("col_attr").get<std::string>(),
                          j.at("row_labels").get<std::vector<std::string>>(),
                          j.at("col_labels").get<std::vector<std::string>>(),
                          j.at("counts").get<std::vector<std::vector<std::uint64_t>>>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("cross tab: ") + e.what());
  }
}

std::string export_table(const CrossTab& t, TableFormat format) {
  if (format == TableFormat::Json) return to_json(t).dump(2) + "\n";
  ReportTable rt;
  rt.header.push_back(t.row_attr);
  for (const auto& c : t.col_labels) rt.header.push_back(c);
  rt.header.emplace_back("n");
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    std::vector<std::string> row{t.row_labels[r]};
    for (double p : t.proportions[r]) row.push_back(fixed2(p));
    row.push_back(std::to_string(t.row_total(r)));
    rt.rows.push_back(std::move(row));
  }
  return render(rt, format);
}

std::string render(const ReportTable& t, TableFormat format) {
  const std::size_t ncol = t.header.size();
  auto cell = [&](std::size_t r, std::size_t c) -> std::string {
    const auto& row = t.rows[r];
    if (c >= row.size()) return "";
    if (c == 0 && t.blank_repeats && r > 0 && !t.rows[r - 1].empty() && t.rows[r - 1][0] == row[0]) return "";
    return row[c];
  };

  std::string out;
  switch (format) {
    case TableFormat::Json: {
      json rows = json::array();
      for (const auto& row : t.rows) rows.push_back(row);
      return json{{"header", t.header}, {"rows", rows}}.dump(2) + "\n";
    }
    case TableFormat::Csv:
      out = io::csv_join(t.header) + "\n";
      for (const auto& row : t.rows) out += io::csv_join(row) + "\n";
      return out;
    case TableFormat::Markdown: {
      auto esc = [](std::string s) {
        std::string o;
        for (char ch : s) {
          if (ch == '|') o.push_back('\\');
          o.push_back(ch);
        }
        return o;
      };
      out = "|";
      for (const auto& h : t.header) out += " " + esc(h) + " |";
      out += "\n|";
      for (std::size_t c = 0; c < ncol; ++c) out += c == 0 ? " --- |" : " ---: |";
      out += "\n";
      for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out += "|";
        for (std::size_t c = 0; c < ncol; ++c) out += " " + esc(cell(r, c)) + " |";
        out += "\n";
      }
      return out;
    }
    case TableFormat::Text:
      break;
  }

  // Text: first column left-aligned, the rest right-aligned.
  std::vector<std::size_t> width(ncol, 0);
  for (std::size_t c = 0; c < ncol; ++c) width[c] = t.header[c].size();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < ncol; ++c) width[c] = std::max(width[c], cell(r, c).size());
  }
  auto line = [&](auto get) {
    std::string l;
    for (std::size_t c = 0; c < ncol; ++c) {
      std::string s = get(c);
      std::string pad(width[c] - std::min(width[c], s.size()), ' ');
      if (c > 0) l += "  ";
      l += c < t.left_aligned ? s + pad : pad + s;
    }
    while (!l.empty() && l.back() == ' ') l.pop_back();
    return l + "\n";
  };
  std::size_t total_width = 0;
  for (auto w : width) total_width += w;
  total_width += ncol > 0 ? 2 * (ncol - 1) : 0;
  const std::string rule(total_width, '-');

  out = line([&](std::size_t c) { return t.header[c]; });
  out += rule + "\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (std::find(t.rules_before.begin(), t.rules_before.end(), r) != t.rules_before.end()) out += rule + "\n";
    out += line([&](std::size_t c) { return cell(r, c); });
  }
  return out;
}

ReportTable label_count_table(std::span<const std::pair<std::string, std::vector<LabelCounts>>> datasets) {
  ReportTable t;
  t.header = {"attribute", "value"};
  for (const auto& [name, _] : datasets) t.header.push_back(name);
  t.blank_repeats = true;
  t.left_aligned = 2;

  std::vector<std::string> attributes;
  for (const auto& [_, counts] : datasets) {
    for (const auto& lc : counts) {
      if (std::find(attributes.begin(), attributes.end(), lc.attribute) == attributes.end()) {
        attributes.push_back(lc.attribute);
      }
    }
  }
  auto find = [](const std::vector<LabelCounts>& v, const std::string& attr) -> const LabelCounts* {
    for (const auto& lc : v) {
      if (lc.attribute == attr) return &lc;
    }
    return nullptr;
  };

  for (const auto& attr : attributes) {
    std::vector<std::string> values;
    bool any_missing = false;
    for (const auto& [_, counts] : datasets) {
      const LabelCounts* lc = find(counts, attr);
      if (!lc) continue;
      for (const auto& [v, c] : lc->counts) {
        if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
      }
      any_missing = any_missing || lc->missing > 0;
    }
    if (any_missing) values.emplace_back(kMissingBucket);
    for (const auto& v : values) {
      std::vector<std::string> row{attr, v};
      for (const auto& [_, counts] : datasets) {
        const LabelCounts* lc = find(counts, attr);
        std::uint64_t n = 0;
        if (lc) n = v == kMissingBucket ? lc->missing : lc->count(v);
        row.push_back(std::to_string(n));
      }
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

std::vector<ColumnGroup> default_column_groups(const Corpus& corpus) {
  static const std::vector<std::string> kPreferred = {"Against/For", "Neoliberalism/Social Good",
                                                      "OnTopic/Not-OnTopic", "Civil/Uncivil"};
  std::vector<const AttributeSchema*> ordered;
  for (const auto& name : kPreferred) {
    if (const auto* s = corpus.schema(name); s && s->kind == AttributeKind::Conversational) ordered.push_back(s);
  }
  for (const auto& s : corpus.schemas) {
    if (s.kind == AttributeKind::Conversational && std::find(ordered.begin(), ordered.end(), &s) == ordered.end()) {
      ordered.push_back(&s);
    }
  }
  std::vector<ColumnGroup> groups;
  for (const auto* sp : ordered) {
    const auto& s = *sp;
    ColumnGroup g{AttributeRef{AttributeRef::Kind::Label, s.name, LabelSource::Auto}, {}};
    for (const auto& v : s.values) {
      if (!is_abstention(v)) g.values.push_back(v);
    }
    if (!g.values.empty()) groups.push_back(std::move(g));
  }
  return groups;
}

ReportTable distribution_table(const Corpus& corpus, std::span<const AttributeRef> row_blocks,
                               std::span<const ColumnGroup> columns) {
  ReportTable t;
  t.header.emplace_back("");
  for (const auto& g : columns) {
    for (const auto& v : g.values) t.header.push_back(v);
  }
  for (const auto& block : row_blocks) {
    if (!t.rows.empty()) t.rules_before.push_back(t.rows.size());
    std::vector<CrossTab> tabs;
    for (const auto& g : columns) tabs.push_back(cross_tab(corpus, block, g.attribute, {g.values}));
    const std::vector<std::string>& labels =
        tabs.empty() ? ref_labels(corpus, resolve(block, corpus)) : tabs.front().row_labels;
    for (std::size_t r = 0; r < labels.size(); ++r) {
      std::string label = labels[r];
      // Ethnicity rows are bare taxonomy paths except for the Unknown bucket.
      if (block.kind != AttributeRef::Kind::EnrichedEthnicity || label == kUnknown) {
        label = block.display_name() + "=" + label;
      }
      std::vector<std::string> row{label};
      for (const auto& tab : tabs) {
        for (double p : tab.proportions[r]) row.push_back(fixed2(p));
      }
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

}  // namespace enrich
