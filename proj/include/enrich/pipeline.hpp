#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "enrich/analysis.hpp"
#include "enrich/annotation.hpp"
#include "enrich/evaluation.hpp"
#include "enrich/features.hpp"
#include "enrich/sampling.hpp"

namespace enrich {

// Everything the subcommands need. Relative paths in a config file are
// resolved against the file's directory.
struct PipelineConfig {
  struct Paths {
    std::optional<std::filesystem::path> raw;        // input to sample
    std::optional<std::filesystem::path> sampled;    // annotated sample (training data)
    std::optional<std::filesystem::path> full;       // corpus to label and enrich
    std::optional<std::filesystem::path> extra;      // optional second target corpus ("new")
    std::optional<std::filesystem::path> name_db;
    std::optional<std::filesystem::path> ethnicity_training;
    std::optional<std::filesystem::path> annotation_log;
    std::optional<std::filesystem::path> static_dir;
    std::filesystem::path models_dir = "models";
    std::filesystem::path out_dir = "out";
    // Command-line overrides for single-dataset stages (sample, spamfilter,
    // predict, enrich, analyze).
    std::optional<std::filesystem::path> input_file;
    std::optional<std::filesystem::path> output_file;
  } paths;

  std::string sampled_name = "sampled";
  std::string full_name = "full";
  std::string extra_name = "new";

  SamplingPlan sampling;
  SpamRuleSet spam;
  FeatureConfig features;
  CVConfig cv;
  Hyperparams base_hyper;
  std::vector<std::string> attributes;  // empty: every annotatable attribute plus Source

  struct Enrichment {
    std::string provider = "local";  // local | remote | none
    std::string url_template;         // remote; ENRICH_ETHNICITY_URL overrides
    std::optional<std::filesystem::path> cache;
    double gender_threshold = 0.95;
    double ethnicity_cutoff = 0.5;
    std::size_t max_in_flight = 4;
    int timeout_ms = 10000;
  } enrichment;

  struct Serve {
    std::string host = "127.0.0.1";
    int port = 8080;
  } serve;

  struct Analysis {
    std::vector<std::string> row_blocks{"enriched.ethnicity", "enriched.gender"};
    TableFormat format = TableFormat::Text;
  } analysis;

  std::string adjudication_policy = "majority";
};

// Applies `j` on top of `base`; unknown keys are an error.
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path);

// Sets one dotted key ("cv.k", "paths.full") from its textual value, which
// is read as JSON when it parses and as a string otherwise.
void set_config_value(nlohmann::json& j, const std::string& dotted_key, const std::string& value);

// File-system slug for an attribute name: "Against/For" -> "against-for".
std::string slug(std::string_view attribute);

// Attributes trained by default, in report order: the case study's ten
// attributes in its evaluation-table order, then any others by kind.
std::vector<std::string> default_train_attributes(const Corpus& corpus);

// Stage runners. Each reads the inputs named in the config, writes its
// outputs atomically and throws enrich::Error on failure. `log` receives
// one-line progress messages.
using Log = std::function<void(const std::string&)>;

std::filesystem::path run_sample(const PipelineConfig& cfg, const Log& log);
std::filesystem::path run_spamfilter(const PipelineConfig& cfg, const Log& log);

// Blocks serving the annotation API until the process is stopped.
void run_serve(const PipelineConfig& cfg, const Log& log);

nlohmann::json run_agreement(const PipelineConfig& cfg, const std::vector<std::string>& attributes, const Log& log);
std::filesystem::path run_adjudicate(const PipelineConfig& cfg, const std::vector<std::string>& attributes,
                                     const Log& log);

std::vector<EvalReport> run_train(const PipelineConfig& cfg, const Log& log);
std::vector<std::filesystem::path> run_predict(const PipelineConfig& cfg, const Log& log);
std::vector<std::filesystem::path> run_enrich(const PipelineConfig& cfg, const Log& log);

struct AnalyzeRequest {
  std::optional<std::string> rows;  // both set: a single cross tab
  std::optional<std::string> cols;
  LabelSource which = LabelSource::Auto;
};

// Without rows/cols: writes the label-count, enrichment and distribution
// reports for every labeled corpus. Returns the text printed to stdout.
std::string run_analyze(const PipelineConfig& cfg, const AnalyzeRequest& req, const Log& log);

// train -> predict -> enrich -> analyze, stopping at the first failure.
void run_pipeline(const PipelineConfig& cfg, const Log& log);

// Derived artifact locations, shared by the stages and the tests.
std::filesystem::path labeled_path(const PipelineConfig& cfg, const std::string& dataset);
std::filesystem::path enriched_path(const PipelineConfig& cfg, const std::string& dataset);

}  // namespace enrich
