// enrich-corpus: command-line driver for the sample -> annotate -> train ->
// predict -> enrich -> analyze workflow.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "enrich/error.hpp"
#include "enrich/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool names_a_file(const std::string& p) {
  const std::string ext = fs::path(p).extension().string();
  return ext == ".jsonl" || ext == ".csv" || ext == ".json" || ext == ".txt" || ext == ".md";
}

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;  // dotted config key -> value
  std::vector<std::string> attrs;
  std::optional<std::string> rows, cols;
  std::string which = "auto";
  bool keep_duplicates = false;
};

// Registers a string option whose value lands at `key` in the overlay config.
void keyed(CLI::App* sub, Flags& f, const std::string& flag, const std::string& key, const std::string& help) {
  sub->add_option_function<std::string>(
      flag, [&f, key](const std::string& v) { f.values[key] = v; }, help);
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file");
  sub->add_option("--seed", f.seed, "seed for sampling and cross-validation");
  sub->add_option("--out", f.out, "output directory (or output file for single-dataset stages)");
  sub->add_option("--set", f.sets, "override a config key, e.g. --set cv.k=10");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus enrichment: annotate, train, label, enrich and tabulate comment corpora", "enrich-corpus"};
  app.require_subcommand(1);
  Flags f;

  auto* sample = app.add_subcommand("sample", "draw the sample to annotate");
  keyed(sample, f, "--in", "paths.input", "raw corpus (JSONL or CSV)");
  keyed(sample, f, "--mode", "sampling.mode", "random | stratified | top-k");
  keyed(sample, f, "--k", "sampling.k", "records per group for top-k");
  keyed(sample, f, "--fraction", "sampling.fraction", "sampling fraction");
  keyed(sample, f, "--group", "sampling.group", "grouping attribute");

  auto* spam = app.add_subcommand("spamfilter", "drop short, link-only and duplicate comments");
  keyed(spam, f, "--in", "paths.input", "corpus to filter");
  keyed(spam, f, "--min-tokens", "spam.min_tokens", "minimum token count");
  keyed(spam, f, "--max-url-fraction", "spam.max_url_fraction", "maximum share of URL tokens");
  spam->add_flag("--keep-duplicates", f.keep_duplicates, "keep exact duplicate texts");

  auto* serve = app.add_subcommand("serve", "run the annotation API (and UI static files)");
  keyed(serve, f, "--in", "paths.sampled", "corpus to annotate");
  keyed(serve, f, "--log", "paths.annotation_log", "annotation event log (JSONL)");
  keyed(serve, f, "--host", "serve.host", "bind address");
  keyed(serve, f, "--port", "serve.port", "port");
  keyed(serve, f, "--static", "paths.static_dir", "directory served at /");

  auto* agreement = app.add_subcommand("agreement", "pairwise percent agreement and Cohen's kappa");
  keyed(agreement, f, "--in", "paths.sampled", "annotated corpus");
  keyed(agreement, f, "--log", "paths.annotation_log", "annotation event log");
  agreement->add_option("--attr", f.attrs, "attribute (repeatable; default all)");

  auto* adjudicate = app.add_subcommand("adjudicate", "derive gold labels from the annotations");
  keyed(adjudicate, f, "--in", "paths.sampled", "annotated corpus");
  keyed(adjudicate, f, "--log", "paths.annotation_log", "annotation event log");
  keyed(adjudicate, f, "--policy", "adjudication_policy", "majority | strict_unanimous");
  adjudicate->add_option("--attr", f.attrs, "attribute (repeatable; default all)");

  auto* train = app.add_subcommand("train", "cross-validate and train one model per attribute");
  keyed(train, f, "--in", "paths.sampled", "gold-labeled corpus");
  keyed(train, f, "--k", "cv.k", "number of folds");
  keyed(train, f, "--grid", "cv.grid", "comma-separated L2 strengths");
  keyed(train, f, "--models", "paths.models_dir", "model output directory");
  train->add_option("--attr", f.attrs, "attribute (repeatable; default all)");

  auto* predict = app.add_subcommand("predict", "label a corpus with the trained models");
  keyed(predict, f, "--models", "paths.models_dir", "model directory");
  keyed(predict, f, "--in", "paths.input", "corpus to label");

  auto* enrich_cmd = app.add_subcommand("enrich", "infer author gender and ethnicity from names");
  keyed(enrich_cmd, f, "--in", "paths.input", "corpus to enrich");
  keyed(enrich_cmd, f, "--names", "paths.name_db", "name,sex,count file");
  keyed(enrich_cmd, f, "--ethnicity-training", "paths.ethnicity_training", "name,path training file");
  keyed(enrich_cmd, f, "--provider", "enrichment.provider", "local | remote | none");
  keyed(enrich_cmd, f, "--threshold", "enrichment.gender_threshold", "gender confidence threshold");
  keyed(enrich_cmd, f, "--cache", "enrichment.cache", "remote lookup cache (JSONL)");

  auto* analyze = app.add_subcommand("analyze", "label counts and cross tabulations");
  keyed(analyze, f, "--in", "paths.input", "labeled/enriched corpus");
  keyed(analyze, f, "--format", "analysis.format", "text | csv | markdown | json");
  analyze->add_option("--rows", f.rows, "row attribute, e.g. enriched.gender");
  analyze->add_option("--cols", f.cols, "column attribute, e.g. Against/For");
  analyze->add_option("--which", f.which, "gold | predicted | auto");

  auto* pipeline = app.add_subcommand("pipeline", "train, predict, enrich and analyze in one go");

  for (auto* sub : app.get_subcommands({})) add_common(sub, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  auto log = [](const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); };
  try {
    enrich::PipelineConfig cfg = f.config.empty() ? enrich::PipelineConfig{} : enrich::load_config(f.config);

    json overlay = json::object();
    for (const auto& [key, value] : f.values) {
      if (key == "cv.grid") {
        // "0.01,0.1,1,10" -> [0.01, 0.1, 1, 10]
        enrich::set_config_value(overlay, key, "[" + value + "]");
      } else if (key.starts_with("paths.") || key == "enrichment.cache" || key == "sampling.group" ||
                 key == "sampling.mode" || key == "enrichment.provider" || key == "serve.host" ||
                 key == "adjudication_policy" || key == "analysis.format") {
        enrich::set_config_value(overlay, key, json(value).dump());
      } else {
        enrich::set_config_value(overlay, key, value);
      }
    }
    if (f.seed) overlay["seed"] = *f.seed;
    if (!f.out.empty()) {
      if (names_a_file(f.out)) {
        overlay["paths"]["output"] = f.out;
      } else {
        overlay["paths"]["out_dir"] = f.out;
        // `train --out models/` names the model directory.
        if (train->parsed() && !f.values.contains("paths.models_dir")) overlay["paths"]["models_dir"] = f.out;
      }
    }
    if (f.keep_duplicates) overlay["spam"]["drop_duplicates"] = false;
    if (!f.attrs.empty() && train->parsed()) overlay["attributes"] = f.attrs;
    for (const auto& s : f.sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw enrich::ValidationError("--set expects key=value, got " + s);
      enrich::set_config_value(overlay, s.substr(0, eq), s.substr(eq + 1));
    }
    cfg = enrich::config_from_json(overlay, fs::current_path(), std::move(cfg));

    if (sample->parsed()) {
      enrich::run_sample(cfg, log);
    } else if (spam->parsed()) {
      enrich::run_spamfilter(cfg, log);
    } else if (serve->parsed()) {
      enrich::run_serve(cfg, log);
    } else if (agreement->parsed()) {
      std::cout << enrich::run_agreement(cfg, f.attrs, log).dump(2) << "\n";
    } else if (adjudicate->parsed()) {
      enrich::run_adjudicate(cfg, f.attrs, log);
    } else if (train->parsed()) {
      auto reports = enrich::run_train(cfg, log);
      std::cout << enrich::render_eval_table(reports);
    } else if (predict->parsed()) {
      enrich::run_predict(cfg, log);
    } else if (enrich_cmd->parsed()) {
      enrich::run_enrich(cfg, log);
    } else if (analyze->parsed()) {
      enrich::AnalyzeRequest req{f.rows, f.cols, enrich::label_source_from_string(f.which)};
      std::cout << enrich::run_analyze(cfg, req, log);
    } else if (pipeline->parsed()) {
      enrich::run_pipeline(cfg, log);
    }
  } catch (const enrich::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
