#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "enrich/corpus.hpp"

namespace enrich {

enum class LabelSource { Gold, Predicted, Auto };

LabelSource label_source_from_string(std::string_view s);

// What a table axis is keyed on: an annotated/predicted attribute or one of
// the name-derived enrichment fields.
struct AttributeRef {
  enum class Kind { Label, EnrichedGender, EnrichedEthnicity };
  Kind kind = Kind::Label;
  std::string attribute;  // Label only
  LabelSource which = LabelSource::Auto;

  // "Gender", "enriched.gender", "Ethnicity" ...
  std::string display_name() const;
};

// "enriched.gender", "enriched.ethnicity", "gold.<attr>", "predicted.<attr>"
// or a bare attribute name (which = `fallback`).
AttributeRef parse_attribute_ref(std::string_view s, LabelSource fallback = LabelSource::Auto);

// Auto resolves to Predicted when any record carries a prediction for the
// attribute, else Gold. Source always resolves to Gold: every record carries it. Throws ValidationError for an unknown attribute.
AttributeRef resolve(const AttributeRef& ref, const Corpus& corpus);

std::optional<std::string> ref_value(const CorpusRecord& rec, const AttributeRef& ref);

// Axis labels: schema (or taxonomy) order, then any other observed values in
// sorted order. Enriched gender is Female, Male, Unknown.
std::vector<std::string> ref_labels(const Corpus& corpus, const AttributeRef& ref);

inline constexpr std::string_view kMissingBucket = "(missing)";

struct LabelCounts {
  std::string attribute;
  std::vector<std::pair<std::string, std::uint64_t>> counts;  // schema order
  std::uint64_t missing = 0;

  std::uint64_t total() const;  // labeled + missing
  std::uint64_t count(std::string_view value) const;
};

std::vector<LabelCounts> label_counts(const Corpus& corpus, std::span<const std::string> attributes, LabelSource which);

struct CrossTab {
  std::string row_attr;
  std::string col_attr;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<std::vector<double>> proportions;  // row-normalized, full precision

  std::uint64_t row_total(std::size_t r) const;
  std::uint64_t total() const;
  // Rows with no records; their proportions are all zero.
  std::vector<std::string> zero_rows() const;
  // Fraction of all counted records in each column.
  std::vector<double> column_marginals() const;

  friend bool operator==(const CrossTab&, const CrossTab&) = default;
};

// Builds a table from counts, filling in the proportions.
CrossTab make_cross_tab(std::string row_attr, std::string col_attr, std::vector<std::string> row_labels,
                        std::vector<std::string> col_labels, std::vector<std::vector<std::uint64_t>> counts);

struct CrossTabOptions {
  // Restrict (and order) the columns; records with another column value are
  // not counted. Empty means every label.
  std::vector<std::string> col_values;
};

// Records missing either value are skipped.
CrossTab cross_tab(const Corpus& corpus, const AttributeRef& rows, const AttributeRef& cols,
                   const CrossTabOptions& opts = {});

// A one-row table over a count summary, e.g. Table 1 columns.
CrossTab cross_tab_from_counts(const LabelCounts& counts, std::string row_label);

enum class TableFormat { Text, Csv, Markdown, Json };

TableFormat table_format_from_string(std::string_view s);

// Proportions to two decimals plus a trailing "n" column of row totals.
// A table without rows renders only its header.
std::string export_table(const CrossTab& table, TableFormat format);

nlohmann::json to_json(const CrossTab& table);
CrossTab cross_tab_from_json(const nlohmann::json& j);

// Plain table used by the report renderers.
struct ReportTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> rules_before;  // row indices preceded by a separator (text only)
  bool blank_repeats = false;             // text/markdown: blank a first cell equal to the one above
  std::size_t left_aligned = 1;           // text: leading columns aligned left
};

std::string render(const ReportTable& table, TableFormat format);

// Counts per attribute and value, one column per dataset (the annotated
// sample shows gold labels, the others predictions). "(missing)" rows appear
// only when some dataset has missing labels for that attribute.
ReportTable label_count_table(std::span<const std::pair<std::string, std::vector<LabelCounts>>> datasets);

struct ColumnGroup {
  AttributeRef attribute;
  std::vector<std::string> values;
};

// The two-valued conversational columns: each conversational attribute
// without its Unknown/Uncommitted/Undetermined value, stance first, then
// framing, topicality and civility, then any others in schema order.
std::vector<ColumnGroup> default_column_groups(const Corpus& corpus);

// Stacked row blocks (e.g. ethnicity, then gender) against column groups,
// each group normalized on its own.
ReportTable distribution_table(const Corpus& corpus, std::span<const AttributeRef> row_blocks,
                               std::span<const ColumnGroup> columns);

}  // namespace enrich
