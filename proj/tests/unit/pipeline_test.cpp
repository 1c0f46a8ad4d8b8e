#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <map>

#include "enrich/error.hpp"
#include "enrich/io.hpp"
#include "enrich/pipeline.hpp"
#include "support.hpp"

using namespace enrich;
namespace fs = std::filesystem;
using nlohmann::json;
using testsupport::TempDir;

namespace {

const fs::path kSource = ENRICH_SOURCE_DIR;

struct Run {
  int status = -1;
  std::string out, err;
};

// Runs the CLI inside `cwd` with the scalar kernels, so results do not
// depend on the host's SIMD support.
Run cli(const fs::path& cwd, const std::string& args) {
  const std::string cmd = "cd '" + cwd.string() + "' && ENRICH_KERNELS=scalar '" + std::string(ENRICH_CLI) + "' " +
                          args + " > cli.stdout 2> cli.stderr";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = io::read_file(cwd / "cli.stdout");
  r.err = io::read_file(cwd / "cli.stderr");
  return r;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename().string().starts_with("cli.")) continue;
    files[fs::relative(e.path(), dir).string()] = io::read_file(e.path());
  }
  return files;
}

}  // namespace

TEST_CASE("config: unknown keys are rejected and dotted overrides apply") {
  json j;
  set_config_value(j, "cv.k", "10");
  set_config_value(j, "paths.full", "corpus.jsonl");
  set_config_value(j, "enrichment.provider", "none");
  auto cfg = config_from_json(j, "/base");
  CHECK(cfg.cv.k == 10);
  CHECK(cfg.paths.full == fs::path("/base/corpus.jsonl"));
  CHECK(cfg.enrichment.provider == "none");
  CHECK_THROWS_AS(config_from_json(json{{"colour", "blue"}}, "/"), ParseError);
  CHECK_THROWS_AS(config_from_json(json{{"cv", {{"folds", 5}}}}, "/"), ParseError);
  CHECK(slug("Against/For") == "against-for");
  CHECK(slug("Neoliberalism/Social Good") == "neoliberalism-social-good");
}

TEST_CASE("CLI: unknown subcommand prints usage and exits 2") {
  TempDir dir;
  auto r = cli(dir.path(), "frobnicate");
  CHECK(r.status == 2);
  CHECK((r.out + r.err).find("sample") != std::string::npos);
  CHECK(cli(dir.path(), "").status == 2);
  CHECK(cli(dir.path(), "train --no-such-flag").status == 2);
}

TEST_CASE("CLI: sample writes a corpus sized per plan") {
  TempDir dir;
  std::string raw;
  for (int i = 0; i < 100; ++i) {
    raw += json{{"id", "r" + std::to_string(i)}, {"text", "comment " + std::to_string(i)},
                {"source", i < 60 ? "CNN" : "FOX"}, {"likes", i}}
               .dump() +
           "\n";
  }
  io::write_file_atomic(dir / "raw.jsonl", raw);
  auto r = cli(dir.path(), "sample --in raw.jsonl --mode stratified --fraction 0.1 --seed 42 --out sampled.jsonl");
  REQUIRE(r.status == 0);
  auto sampled = load_corpus(dir / "sampled.jsonl");
  CHECK(sampled.size() == 10);

  r = cli(dir.path(), "sample --in raw.jsonl --mode top-k --k 3 --group source --out top.jsonl");
  REQUIRE(r.status == 0);
  auto top = load_corpus(dir / "top.jsonl");
  REQUIRE(top.size() == 6);
  CHECK(top.records[0].id == "r59");
  CHECK(top.records[3].id == "r99");
}

TEST_CASE("CLI: spamfilter writes kept records and removal reasons") {
  TempDir dir;
  io::write_file_atomic(dir / "in.jsonl",
                        "{\"id\":\"a\",\"text\":\"free college now\"}\n"
                        "{\"id\":\"b\",\"text\":\"free college now\"}\n"
                        "{\"id\":\"c\",\"text\":\"http://spam.example\"}\n");
  auto r = cli(dir.path(), "spamfilter --in in.jsonl --out filtered.jsonl");
  REQUIRE(r.status == 0);
  CHECK(load_corpus(dir / "filtered.jsonl").size() == 1);
  const auto removed = io::read_file(dir / "filtered.removed.csv");
  CHECK(removed.find("b,") != std::string::npos);
  CHECK(removed.find("c,") != std::string::npos);
}

TEST_CASE("CLI: agreement and adjudication from an event log") {
  TempDir dir;
  io::write_file_atomic(dir / "items.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\",\"text\":\"y\"}\n");
  std::string log;
  for (auto [item, who, v] : {std::tuple{"a", "ann1", "For"}, {"a", "ann2", "For"}, {"b", "ann1", "For"},
                              {"b", "ann2", "Against"}}) {
    log += json{{"item_id", item}, {"annotator", who}, {"attribute", "Against/For"}, {"value", v}}.dump() + "\n";
  }
  io::write_file_atomic(dir / "events.jsonl", log);
  auto r = cli(dir.path(), "agreement --in items.jsonl --log events.jsonl --attr Against/For --out .");
  REQUIRE(r.status == 0);
  auto j = json::parse(r.out);
  CHECK(j.dump().find("\"percent_agreement\":0.5") != std::string::npos);

  r = cli(dir.path(), "adjudicate --in items.jsonl --log events.jsonl --attr Against/For --out gold.jsonl");
  REQUIRE(r.status == 0);
  auto gold = load_corpus(dir / "gold.jsonl");
  CHECK(gold.find("a")->gold_labels.at("Against/For") == "For");
  CHECK_FALSE(gold.find("b")->gold_labels.contains("Against/For"));
}

TEST_CASE("CLI: a missing input is a named error with a nonzero exit") {
  TempDir dir;
  auto r = cli(dir.path(), "train --in nowhere.jsonl");
  CHECK(r.status == 1);
  CHECK(r.err.find("nowhere.jsonl") != std::string::npos);
  r = cli(dir.path(), "predict --in nowhere.jsonl --models models");
  CHECK(r.status == 1);
}

TEST_CASE("CLI: pipeline reproduces the golden tables and is idempotent") {
  TempDir dir;
  const auto config = (kSource / "data/synthetic/pipeline.json").string();
  const auto start = std::chrono::steady_clock::now();
  auto r = cli(dir.path(), "pipeline --config '" + config + "'");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  REQUIRE_MESSAGE(r.status == 0, r.err);
  CHECK(seconds < 30.0);

  for (const auto* name : {"table1.txt", "table2.txt", "table3.txt", "table4_full.txt", "table4_new.txt"}) {
    INFO("golden file: " << name);
    CHECK(io::read_file(dir / "out" / name) == io::read_file(kSource / "tests/golden" / name));
  }

  const auto first = snapshot(dir.path());
  CHECK(first.size() > 10);
  r = cli(dir.path(), "pipeline --config '" + config + "'");
  REQUIRE(r.status == 0);
  CHECK(snapshot(dir.path()) == first);

  // A single cross tab in markdown.
  r = cli(dir.path(),
          "analyze --in out/full.enriched.jsonl --rows enriched.gender --cols Against/For --format markdown");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("| Gender | Against | For | Uncommitted | n |") != std::string::npos);
}
