#include "enrich/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include <httplib.h>

#include "enrich/annotation_service.hpp"
#include "enrich/classifier.hpp"
#include "enrich/enrichment.hpp"
#include "enrich/error.hpp"
#include "enrich/io.hpp"
#include "enrich/text.hpp"

namespace enrich {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError("config: " + where + " must be an object");
  for (const auto& [k, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ParseError("config: unknown key " + (where.empty() ? k : where + "." + k));
    }
  }
}

fs::path resolve_path(const json& v, const fs::path& base_dir) {
  fs::path p = v.get<std::string>();
  return p.is_absolute() ? p : (base_dir / p).lexically_normal();
}

std::string extension(TableFormat f) {
  switch (f) {
    case TableFormat::Csv:
      return ".csv";
    case TableFormat::Markdown:
      return ".md";
    case TableFormat::Json:
      return ".json";
    case TableFormat::Text:
      break;
  }
  return ".txt";
}

const fs::path& require(const std::optional<fs::path>& p, const std::string& what) {
  if (!p) throw ValidationError("missing input: " + what + " is not configured");
  if (!fs::exists(*p)) throw IoError("missing input: " + what + " (" + p->string() + ") does not exist");
  return *p;
}

Corpus load_input(const fs::path& p) {
  if (!fs::exists(p)) throw IoError("missing input: " + p.string() + " does not exist");
  return load_corpus(p);
}

// Datasets to label/enrich: (name, source path).
std::vector<std::pair<std::string, fs::path>> target_datasets(const PipelineConfig& cfg) {
  std::vector<std::pair<std::string, fs::path>> out;
  if (cfg.paths.input_file) {
    out.emplace_back(cfg.full_name, *cfg.paths.input_file);
    return out;
  }
  if (cfg.paths.full) out.emplace_back(cfg.full_name, *cfg.paths.full);
  if (cfg.paths.extra) out.emplace_back(cfg.extra_name, *cfg.paths.extra);
  if (out.empty()) throw ValidationError("missing input: paths.full is not configured");
  return out;
}

fs::path single_output(const PipelineConfig& cfg, const std::string& default_name) {
  return cfg.paths.output_file ? *cfg.paths.output_file : cfg.paths.out_dir / default_name;
}

class NoEthnicityProvider : public EthnicityProvider {
 public:
  EthnicityPath lookup(const std::string&) override { return EthnicityPath{}; }
};

std::unique_ptr<EthnicityProvider> make_provider(const PipelineConfig& cfg, const Log& log) {
  const auto& e = cfg.enrichment;
  std::string url = e.url_template;
  if (const char* env = std::getenv("ENRICH_ETHNICITY_URL"); env && *env) url = env;
  std::string kind = e.provider;
  if (kind == "local" && !url.empty() && !cfg.paths.ethnicity_training) kind = "remote";
  if (kind == "remote") {
    if (url.empty()) throw ValidationError("remote ethnicity provider needs enrichment.url or ENRICH_ETHNICITY_URL");
    log("ethnicity: remote provider " + url);
    return std::make_unique<RemoteEthnicityProvider>(url, make_http_get(std::chrono::milliseconds(e.timeout_ms)),
                                                     e.cache, e.max_in_flight, e.ethnicity_cutoff);
  }
  if (kind == "local") {
    const fs::path& training = require(cfg.paths.ethnicity_training, "paths.ethnicity_training");
    auto p = LocalEthnicityProvider::train_from_file(training);
    log("ethnicity: local model trained on " + std::to_string(p.model().info.n_train) + " names");
    return std::make_unique<LocalEthnicityProvider>(p.model(), e.ethnicity_cutoff);
  }
  if (kind == "none") return std::make_unique<NoEthnicityProvider>();
  throw ValidationError("unknown ethnicity provider: " + kind);
}

AnnotationStore open_store_for(const PipelineConfig& cfg, bool log_must_exist) {
  Corpus items = load_input(require(cfg.paths.sampled, "paths.sampled"));
  fs::path log_path = cfg.paths.annotation_log.value_or(cfg.paths.out_dir / "annotations.jsonl");
  if (log_must_exist && !fs::exists(log_path)) {
    throw IoError("missing input: annotation log " + log_path.string() + " does not exist");
  }
  return AnnotationStore(std::move(items), log_path);
}

}  // namespace

PipelineConfig config_from_json(const json& j, const fs::path& base_dir, PipelineConfig cfg) {
  check_keys(j, {"paths", "names", "seed", "sampling", "spam", "features", "cv", "attributes", "enrichment", "serve",
                 "analysis", "adjudication_policy"},
             "");
  try {
    if (j.contains("paths")) {
      const json& p = j["paths"];
      check_keys(p, {"raw", "sampled", "full", "new", "name_db", "ethnicity_training", "annotation_log", "static_dir",
                     "models_dir", "out_dir", "input", "output"},
                 "paths");
      auto opt = [&](const char* key, std::optional<fs::path>& dst) {
        if (p.contains(key)) dst = p[key].is_null() ? std::nullopt : std::optional(resolve_path(p[key], base_dir));
      };
      opt("raw", cfg.paths.raw);
      opt("sampled", cfg.paths.sampled);
      opt("full", cfg.paths.full);
      opt("new", cfg.paths.extra);
      opt("name_db", cfg.paths.name_db);
      opt("ethnicity_training", cfg.paths.ethnicity_training);
      opt("annotation_log", cfg.paths.annotation_log);
      opt("static_dir", cfg.paths.static_dir);
      opt("input", cfg.paths.input_file);
      opt("output", cfg.paths.output_file);
      if (p.contains("models_dir")) cfg.paths.models_dir = resolve_path(p["models_dir"], base_dir);
      if (p.contains("out_dir")) cfg.paths.out_dir = resolve_path(p["out_dir"], base_dir);
    }
    if (j.contains("names")) {
      const json& n = j["names"];
      check_keys(n, {"sampled", "full", "new"}, "names");
      cfg.sampled_name = n.value("sampled", cfg.sampled_name);
      cfg.full_name = n.value("full", cfg.full_name);
      cfg.extra_name = n.value("new", cfg.extra_name);
    }
    if (j.contains("seed")) {
      const auto seed = j["seed"].get<std::uint64_t>();
      cfg.sampling.seed = seed;
      cfg.cv.seed = seed;
    }
    if (j.contains("sampling")) {
      const json& s = j["sampling"];
      check_keys(s, {"mode", "fraction", "k", "group", "seed"}, "sampling");
      if (s.contains("mode")) cfg.sampling.mode = sampling_mode_from_string(s["mode"].get<std::string>());
      cfg.sampling.fraction = s.value("fraction", cfg.sampling.fraction);
      cfg.sampling.k = s.value("k", cfg.sampling.k);
      cfg.sampling.group_attr = s.value("group", cfg.sampling.group_attr);
      cfg.sampling.seed = s.value("seed", cfg.sampling.seed);
    }
    if (j.contains("spam")) {
      const json& s = j["spam"];
      check_keys(s, {"min_tokens", "max_url_fraction", "drop_duplicates"}, "spam");
      cfg.spam.min_tokens = s.value("min_tokens", cfg.spam.min_tokens);
      cfg.spam.max_url_fraction = s.value("max_url_fraction", cfg.spam.max_url_fraction);
      cfg.spam.drop_exact_duplicates = s.value("drop_duplicates", cfg.spam.drop_exact_duplicates);
      cfg.spam.check();
    }
    if (j.contains("features")) {
      check_keys(j["features"], {"n_min", "n_max", "min_df", "lowercase", "weighting", "analyzer"}, "features");
      json merged = to_json(cfg.features);
      merged.update(j["features"]);
      cfg.features = feature_config_from_json(merged);
    }
    if (j.contains("cv")) {
      const json& c = j["cv"];
      check_keys(c, {"k", "seed", "grid", "max_iters", "tol"}, "cv");
      cfg.cv.k = c.value("k", cfg.cv.k);
      cfg.cv.seed = c.value("seed", cfg.cv.seed);
      cfg.base_hyper.max_iters = c.value("max_iters", cfg.base_hyper.max_iters);
      cfg.base_hyper.tol = c.value("tol", cfg.base_hyper.tol);
      std::vector<double> lambdas;
      for (const auto& h : cfg.cv.grid) lambdas.push_back(h.lambda);
      if (c.contains("grid")) lambdas = c["grid"].get<std::vector<double>>();
      cfg.cv.grid = grid_from_lambdas(lambdas, cfg.base_hyper);
      if (cfg.cv.k < 2) throw ValidationError("cv.k must be at least 2");
    }
    if (j.contains("attributes")) cfg.attributes = j["attributes"].get<std::vector<std::string>>();
    if (j.contains("enrichment")) {
      const json& e = j["enrichment"];
      check_keys(e, {"provider", "url", "cache", "gender_threshold", "ethnicity_cutoff", "max_in_flight", "timeout_ms"},
                 "enrichment");
      cfg.enrichment.provider = e.value("provider", cfg.enrichment.provider);
      cfg.enrichment.url_template = e.value("url", cfg.enrichment.url_template);
      if (e.contains("cache")) cfg.enrichment.cache = resolve_path(e["cache"], base_dir);
      cfg.enrichment.gender_threshold = e.value("gender_threshold", cfg.enrichment.gender_threshold);
      cfg.enrichment.ethnicity_cutoff = e.value("ethnicity_cutoff", cfg.enrichment.ethnicity_cutoff);
      cfg.enrichment.max_in_flight = e.value("max_in_flight", cfg.enrichment.max_in_flight);
      cfg.enrichment.timeout_ms = e.value("timeout_ms", cfg.enrichment.timeout_ms);
    }
    if (j.contains("serve")) {
      const json& s = j["serve"];
      check_keys(s, {"host", "port"}, "serve");
      cfg.serve.host = s.value("host", cfg.serve.host);
      cfg.serve.port = s.value("port", cfg.serve.port);
    }
    if (j.contains("analysis")) {
      const json& a = j["analysis"];
      check_keys(a, {"rows", "format"}, "analysis");
      if (a.contains("rows")) cfg.analysis.row_blocks = a["rows"].get<std::vector<std::string>>();
      if (a.contains("format")) cfg.analysis.format = table_format_from_string(a["format"].get<std::string>());
    }
    if (j.contains("adjudication_policy")) {
      cfg.adjudication_policy = j["adjudication_policy"].get<std::string>();
      adjudication_policy_from_string(cfg.adjudication_policy);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return config_from_json(j, fs::absolute(path).parent_path());
}

void set_config_value(json& j, const std::string& dotted_key, const std::string& value) {
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    auto dot = dotted_key.find('.', start);
    std::string key = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ValidationError("bad config key: " + dotted_key);
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    if (!node->is_object()) *node = json::object();
    start = dot + 1;
  }
}

std::string slug(std::string_view attribute) {
  std::string out;
  for (unsigned char c : attribute) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (!out.empty() && out.back() != '-') {
      out.push_back('-');
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

std::vector<std::string> default_train_attributes(const Corpus& corpus) {
  // Report order of the case study's evaluation table; other attributes
  // follow by kind in schema order.
  static const std::vector<std::string> kPreferred = {
      "Source",      "Gender",      "Age Category", "Race", "Military Family", "Political Leaning",
      "Against/For", "Neoliberalism/Social Good", "OnTopic/Not-OnTopic", "Civil/Uncivil"};
  std::vector<std::string> out;
  for (const auto& name : kPreferred) {
    if (corpus.schema(name)) out.push_back(name);
  }
  for (AttributeKind kind : {AttributeKind::Source, AttributeKind::Demographic, AttributeKind::Conversational}) {
    for (const auto& s : corpus.schemas) {
      if (s.kind == kind && std::find(out.begin(), out.end(), s.name) == out.end()) out.push_back(s.name);
    }
  }
  return out;
}

fs::path labeled_path(const PipelineConfig& cfg, const std::string& dataset) {
  return cfg.paths.out_dir / (dataset + ".labeled.jsonl");
}

fs::path enriched_path(const PipelineConfig& cfg, const std::string& dataset) {
  return cfg.paths.out_dir / (dataset + ".enriched.jsonl");
}

fs::path run_sample(const PipelineConfig& cfg, const Log& log) {
  Corpus corpus = load_input(cfg.paths.input_file ? *cfg.paths.input_file : require(cfg.paths.raw, "paths.raw"));
  SamplingPlan plan = cfg.sampling;
  // "--group source" names the Source attribute.
  if (!corpus.schema(plan.group_attr)) {
    for (const auto& s : corpus.schemas) {
      if (text::to_lower(s.name) == text::to_lower(plan.group_attr)) plan.group_attr = s.name;
    }
  }
  SampleResult r = sample(corpus, plan);
  for (const auto& note : r.notes) log("sample: " + note);
  fs::path out = single_output(cfg, "sampled.jsonl");
  write_corpus(r.sample, out);
  log("sample: " + std::to_string(r.sample.size()) + " of " + std::to_string(corpus.size()) + " records -> " +
      out.string());
  return out;
}

fs::path run_spamfilter(const PipelineConfig& cfg, const Log& log) {
  Corpus corpus = load_input(cfg.paths.input_file ? *cfg.paths.input_file : require(cfg.paths.raw, "paths.raw"));
  SpamFilterResult r = spam_filter(corpus, cfg.spam);
  fs::path out = single_output(cfg, "filtered.jsonl");
  write_corpus(r.kept, out);
  std::string removed = "id,reason\n";
  for (const auto& rm : r.reasons) removed += io::csv_join({rm.id, rm.reason}) + "\n";
  fs::path removed_path = out.parent_path() / (out.stem().string() + ".removed.csv");
  io::write_file_atomic(removed_path, removed);
  log("spamfilter: kept " + std::to_string(r.kept.size()) + ", removed " + std::to_string(r.removed.size()) + " -> " +
      out.string());
  return out;
}

void run_serve(const PipelineConfig& cfg, const Log& log) {
  AnnotationStore store = open_store_for(cfg, false);
  AnnotationService service(store);
  httplib::Server server;
  std::optional<fs::path> static_dir;
  if (cfg.paths.static_dir) static_dir = require(cfg.paths.static_dir, "paths.static_dir");
  service.mount(server, static_dir);
  log("serve: http://" + cfg.serve.host + ":" + std::to_string(cfg.serve.port) + "/ (" +
      std::to_string(store.corpus().size()) + " items)");
  if (!server.listen(cfg.serve.host, cfg.serve.port)) {
    throw IoError("serve: cannot listen on " + cfg.serve.host + ":" + std::to_string(cfg.serve.port));
  }
}

json run_agreement(const PipelineConfig& cfg, const std::vector<std::string>& attributes, const Log& log) {
  AnnotationStore store = open_store_for(cfg, true);
  std::vector<std::string> attrs = attributes.empty() ? store.annotatable_attributes() : attributes;
  json out = json::array();
  for (const auto& a : attrs) {
    store.corpus().require_schema(a);
    AgreementSummary s = agreement_summary(store, a);
    json j = to_json(s);
    if (s.pairs.empty()) {
      j["error"] = "no overlap";
      log("agreement: " + a + ": no overlapping annotator pairs");
    }
    out.push_back(std::move(j));
  }
  io::write_file_atomic(cfg.paths.out_dir / "agreement.json", out.dump(2) + "\n");
  return out;
}

fs::path run_adjudicate(const PipelineConfig& cfg, const std::vector<std::string>& attributes, const Log& log) {
  AnnotationStore store = open_store_for(cfg, true);
  const AdjudicationPolicy policy = adjudication_policy_from_string(cfg.adjudication_policy);
  std::vector<std::string> attrs = attributes.empty() ? store.annotatable_attributes() : attributes;
  Corpus gold = store.corpus();
  for (const auto& a : attrs) {
    gold.require_schema(a);
    AdjudicationResult r = adjudicate(store, a, policy);
    gold = apply_gold(gold, a, r);
    log("adjudicate: " + a + ": " + std::to_string(r.gold.size()) + " resolved, " +
        std::to_string(r.unresolved.size()) + " unresolved");
  }
  fs::path out = single_output(cfg, "adjudicated.jsonl");
  write_corpus(gold, out);
  return out;
}

std::vector<EvalReport> run_train(const PipelineConfig& cfg, const Log& log) {
  Corpus corpus = load_input(require(cfg.paths.sampled, "paths.sampled"));
  std::vector<std::string> attrs = cfg.attributes.empty() ? default_train_attributes(corpus) : cfg.attributes;
  std::vector<EvalReport> reports;
  json all = json::array();
  for (const auto& a : attrs) {
    corpus.require_schema(a);
    EvalReport report = cross_validate(corpus, a, cfg.cv, cfg.features);
    FinalModel final_model = finalize(corpus, a, report.chosen, cfg.features);
    report.overall = final_model.overall;
    fs::path model_path = cfg.paths.models_dir / (slug(a) + ".model.json");
    save_model(final_model.model, model_path);
    log("train: " + a + ": lambda=" + json(report.chosen.lambda).dump() + " overall=" +
        json(final_model.overall).dump() + " mean (std)=" + report.mean_std_string() + " -> " + model_path.string());
    all.push_back(to_json(report));
    reports.push_back(std::move(report));
  }
  io::write_file_atomic(cfg.paths.out_dir / "eval.json", all.dump(2) + "\n");
  io::write_file_atomic(cfg.paths.out_dir / "table2.txt", render_eval_table(reports));
  return reports;
}

std::vector<fs::path> run_predict(const PipelineConfig& cfg, const Log& log) {
  if (!fs::is_directory(cfg.paths.models_dir)) {
    throw IoError("missing input: models directory " + cfg.paths.models_dir.string() + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(cfg.paths.models_dir)) {
    if (e.is_regular_file() && e.path().filename().string().ends_with(".model.json")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("missing input: no *.model.json in " + cfg.paths.models_dir.string());
  std::map<std::string, TrainedModel> models;
  for (const auto& f : files) {
    TrainedModel m = load_model(f);
    models.emplace(m.attribute, std::move(m));
  }

  std::vector<fs::path> outputs;
  for (const auto& [name, path] : target_datasets(cfg)) {
    Corpus labeled = annotate_corpus(models, load_input(path));
    fs::path out = cfg.paths.output_file && cfg.paths.input_file ? *cfg.paths.output_file : labeled_path(cfg, name);
    write_corpus(labeled, out);
    log("predict: " + name + ": " + std::to_string(labeled.size()) + " records x " + std::to_string(models.size()) +
        " models -> " + out.string());
    outputs.push_back(out);
  }
  return outputs;
}

std::vector<fs::path> run_enrich(const PipelineConfig& cfg, const Log& log) {
  NameGenderDB db = load_name_db(require(cfg.paths.name_db, "paths.name_db"));
  auto provider = make_provider(cfg, log);
  std::vector<fs::path> outputs;
  for (const auto& [name, raw_path] : target_datasets(cfg)) {
    // Prefer the labeled corpus from predict when it exists.
    fs::path in = raw_path;
    if (!cfg.paths.input_file && fs::exists(labeled_path(cfg, name))) in = labeled_path(cfg, name);
    EnrichResult r = enrich(load_input(in), db, *provider, cfg.enrichment.gender_threshold);
    fs::path out = cfg.paths.output_file && cfg.paths.input_file ? *cfg.paths.output_file : enriched_path(cfg, name);
    write_corpus(r.corpus, out);
    log("enrich: " + name + ": " + std::to_string(r.corpus.size()) + " records -> " + out.string());
    outputs.push_back(out);
  }
  if (auto* remote = dynamic_cast<RemoteEthnicityProvider*>(provider.get())) {
    if (!remote->failures().empty()) {
      log("enrich: " + std::to_string(remote->failures().size()) + " ethnicity lookups failed and were set to Unknown");
    }
  }
  return outputs;
}

std::string run_analyze(const PipelineConfig& cfg, const AnalyzeRequest& req, const Log& log) {
  const TableFormat fmt = cfg.analysis.format;
  auto best_input = [&](const std::string& name, const fs::path& raw) {
    if (fs::exists(enriched_path(cfg, name))) return enriched_path(cfg, name);
    if (fs::exists(labeled_path(cfg, name))) return labeled_path(cfg, name);
    return raw;
  };

  if (req.rows || req.cols) {
    if (!req.rows || !req.cols) throw ValidationError("analyze: --rows and --cols go together");
    const auto datasets = target_datasets(cfg);
    fs::path in = cfg.paths.input_file ? *cfg.paths.input_file : best_input(datasets[0].first, datasets[0].second);
    Corpus corpus = load_input(in);
    CrossTab t = cross_tab(corpus, parse_attribute_ref(*req.rows, req.which), parse_attribute_ref(*req.cols, req.which));
    std::string text = export_table(t, fmt);
    fs::path out = cfg.paths.output_file
                       ? *cfg.paths.output_file
                       : cfg.paths.out_dir / ("crosstab_" + slug(*req.rows) + "_" + slug(*req.cols) + extension(fmt));
    io::write_file_atomic(out, text);
    log("analyze: " + t.row_attr + " x " + t.col_attr + " over " + std::to_string(t.total()) + " records -> " +
        out.string());
    return text;
  }

  std::string printed;
  auto emit = [&](const std::string& title, const std::string& file, const std::string& body) {
    fs::path out = cfg.paths.out_dir / (file + extension(fmt));
    io::write_file_atomic(out, body);
    log("analyze: " + title + " -> " + out.string());
    if (fmt == TableFormat::Text) printed += title + "\n\n" + body + "\n";
  };

  // Label counts: gold on the annotated sample, predictions elsewhere.
  std::vector<std::pair<std::string, std::vector<LabelCounts>>> counts;
  std::vector<std::pair<std::string, Corpus>> targets;
  std::vector<std::string> attrs;
  if (cfg.paths.sampled && fs::exists(*cfg.paths.sampled)) {
    Corpus sampled = load_corpus(*cfg.paths.sampled);
    for (const auto& s : sampled.schemas) attrs.push_back(s.name);
    counts.emplace_back(cfg.sampled_name, label_counts(sampled, attrs, LabelSource::Gold));
  }
  for (const auto& [name, raw] : target_datasets(cfg)) {
    Corpus c = load_input(cfg.paths.input_file ? raw : best_input(name, raw));
    if (attrs.empty()) {
      for (const auto& s : c.schemas) attrs.push_back(s.name);
    }
    counts.emplace_back(name, label_counts(c, attrs, LabelSource::Auto));
    targets.emplace_back(name, std::move(c));
  }
  emit("Label counts", "table1", render(label_count_table(counts), fmt));

  std::vector<std::pair<std::string, EnrichmentSummary>> summaries;
  for (const auto& [name, c] : targets) {
    const bool enriched = std::any_of(c.records.begin(), c.records.end(),
                                      [](const CorpusRecord& r) { return !r.enriched.empty(); });
    if (enriched) summaries.emplace_back(name, summarize_enrichment(c));
  }
  if (!summaries.empty()) {
    ReportTable t;
    t.header = {"Ethnicity/Gender"};
    for (const auto& [name, _] : summaries) t.header.push_back(name);
    std::vector<std::string> labels;
    std::vector<std::map<std::string, std::size_t>> cols;
    for (const auto& [_, s] : summaries) {
      std::map<std::string, std::size_t> col;
      for (const auto& [label, n] : enrichment_rows(s)) {
        col[label] = n;
        if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
      }
      cols.push_back(std::move(col));
    }
    std::stable_partition(labels.begin(), labels.end(), [](const std::string& l) { return !l.starts_with("Gender="); });
    for (const auto& l : labels) {
      if (l.starts_with("Gender=") && t.rules_before.empty()) t.rules_before.push_back(t.rows.size());
      std::vector<std::string> row{l};
      for (const auto& col : cols) row.push_back(std::to_string(col.contains(l) ? col.at(l) : 0));
      t.rows.push_back(std::move(row));
    }
    emit("Predicted gender and ethnicity", "table3", render(t, fmt));

    for (const auto& [name, c] : targets) {
      if (std::none_of(summaries.begin(), summaries.end(), [&](const auto& s) { return s.first == name; })) continue;
      std::vector<AttributeRef> blocks;
      for (const auto& r : cfg.analysis.row_blocks) blocks.push_back(parse_attribute_ref(r));
      const auto groups = default_column_groups(c);
      emit("Conversational attributes by demographic (" + name + ")", "table4_" + slug(name),
           render(distribution_table(c, blocks, groups), fmt));
    }
  }
  return printed;
}

void run_pipeline(const PipelineConfig& cfg, const Log& log) {
  log("pipeline: train");
  run_train(cfg, log);
  log("pipeline: predict");
  run_predict(cfg, log);
  log("pipeline: enrich");
  run_enrich(cfg, log);
  log("pipeline: analyze");
  run_analyze(cfg, {}, log);
}

}  // namespace enrich
