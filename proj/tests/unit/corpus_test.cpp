#include <doctest.h>

#include <random>
#include <string>

#include "enrich/corpus.hpp"
#include "enrich/error.hpp"
#include "enrich/io.hpp"
#include "enrich/text.hpp"
#include "support.hpp"

using namespace enrich;
using testsupport::corpus_of;
using testsupport::record;
using testsupport::TempDir;

TEST_CASE("load_corpus: empty inputs give empty corpora") {
  TempDir dir;
  io::write_file_atomic(dir / "empty.jsonl", "");
  CHECK(load_corpus(dir / "empty.jsonl").size() == 0);
  io::write_file_atomic(dir / "header.csv", "id,text\n");
  CHECK(load_corpus(dir / "header.csv").size() == 0);
}

TEST_CASE("load_corpus preserves input order") {
  TempDir dir;
  io::write_file_atomic(dir / "two.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\",\"text\":\"y\"}\n");
  auto c = load_corpus(dir / "two.jsonl");
  REQUIRE(c.size() == 2);
  CHECK(c.records[0].id == "a");
  CHECK(c.records[1].id == "b");
  CHECK(c.schemas == default_schemas());
}

TEST_CASE("load_corpus names the duplicate id and its line") {
  const std::string content =
      "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\",\"text\":\"y\"}\n{\"id\":\"a\",\"text\":\"z\"}\n";
  try {
    parse_jsonl(content, default_schemas());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("duplicate id: a, line 3") != std::string::npos);
  }
}

TEST_CASE("malformed rows are reported with their line number") {
  try {
    parse_jsonl("{\"id\":\"a\",\"text\":\"x\"}\n{not json}\n", default_schemas());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_jsonl("{\"text\":\"no id\"}\n", default_schemas()), ParseError);
  try {
    parse_csv_corpus("id,text,likes\na,x,1\nb,y,many\n", default_schemas());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("NBC News is canonicalized to MSN") {
  auto c = parse_jsonl("{\"id\":\"a\",\"text\":\"x\",\"source\":\"NBC News\"}\n", default_schemas());
  CHECK(c.records[0].source == "MSN");
}

TEST_CASE("write_corpus of an empty corpus leaves an empty file and the sidecar") {
  TempDir dir;
  Corpus c = corpus_of({});
  write_corpus(c, dir / "out.jsonl");
  CHECK(io::read_file(dir / "out.jsonl").empty());
  CHECK(std::filesystem::exists(schema_sidecar_path(dir / "out.jsonl")));
  CHECK(load_corpus(dir / "out.jsonl") == c);
}

namespace {

Corpus random_corpus(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {"free", "college", "é", "\"quoted\"", "comma,", "line\nbreak", "ü"};
  const auto schemas = default_schemas();
  std::vector<CorpusRecord> recs;
  const std::size_t n = rng() % 8;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    for (std::size_t w = rng() % 6; w > 0; --w) text += words[rng() % words.size()] + " ";
    CorpusRecord r = record("r" + std::to_string(i), text, schemas.back().values[rng() % 4],
                            static_cast<std::int64_t>(rng() % 1000));
    if (rng() % 2) r.created_at = "2019-03-0" + std::to_string(1 + rng() % 9);
    if (rng() % 2) r.author_name = "Name " + std::to_string(rng() % 100);
    if (rng() % 3 == 0) r.likes.reset();
    for (const auto& s : schemas) {
      if (s.kind == AttributeKind::Source) continue;
      if (rng() % 2) r.gold_labels[s.name] = s.values[rng() % s.values.size()];
      if (rng() % 3 == 0) {
        r.predicted_labels[s.name] = {s.values[rng() % s.values.size()],
                                      std::uniform_real_distribution<double>(0, 1)(rng)};
      }
    }
    if (rng() % 2) {
      r.enriched.gender_pred = rng() % 2 ? "Female" : "Unknown";
      r.enriched.ethnicity_path = {"GreaterEuropean", "British"};
      r.enriched.ethnicity_confidence = std::uniform_real_distribution<double>(0, 1)(rng);
    }
    recs.push_back(std::move(r));
  }
  return corpus_of(std::move(recs));
}

}  // namespace

TEST_CASE("property: JSONL write/load round-trip is field-equal") {
  TempDir dir;
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Corpus c = random_corpus(rng);
    write_corpus(c, dir / "rt.jsonl");
    Corpus back = load_corpus(dir / "rt.jsonl");
    REQUIRE(back == c);
    CHECK(validate(back).empty());
  }
}

TEST_CASE("CSV round-trip keeps label columns") {
  TempDir dir;
  Corpus c = corpus_of({record("a", "one, two", "FOX", 3), record("b", "three\n\"four\"", "CNN", 0)});
  c.records[0].gold_labels["Against/For"] = "For";
  c.records[1].gold_labels["Gender"] = "Male";
  write_corpus(c, dir / "rt.csv");
  Corpus back = load_corpus(dir / "rt.csv");
  CHECK(back == c);
}

TEST_CASE("anonymize_on_write drops author_name") {
  TempDir dir;
  Corpus c = corpus_of({record("a", "x")});
  c.records[0].author_name = "Mary Smith";
  write_corpus(c, dir / "anon.jsonl", {.anonymize_on_write = true, .anonymization_key = "k"});
  const std::string raw = io::read_file(dir / "anon.jsonl");
  CHECK(raw.find("author_name") == std::string::npos);
  CHECK(raw.find("Mary") == std::string::npos);
  CHECK(load_corpus(dir / "anon.jsonl").records[0].author_pseudonym == pseudonym("Mary Smith", "k"));
}

TEST_CASE("anonymize: keyed, deterministic, normalized") {
  Corpus c = corpus_of({record("a", "x"), record("b", "y"), record("c", "z")});
  c.records[0].author_name = "John  Smith";
  c.records[1].author_name = "john smith";
  Corpus a = anonymize(c, "secret");
  CHECK(a.records[0].author_pseudonym == a.records[1].author_pseudonym);
  CHECK(a.records[0].author_pseudonym->size() == 16);
  CHECK_FALSE(a.records[0].author_name.has_value());
  CHECK(a.records[2] == c.records[2]);
  Corpus b = anonymize(c, "other");
  CHECK(b.records[0].author_pseudonym != a.records[0].author_pseudonym);
  CHECK(*a.records[0].author_pseudonym == text::hmac_sha256_hex("secret", "john smith").substr(0, 16));
  CHECK_THROWS_AS(anonymize(c, ""), ValidationError);
}

TEST_CASE("validate reports schema and range violations") {
  Corpus ok = corpus_of({record("a", "x")});
  ok.records[0].gold_labels["Gender"] = "Female";
  ok.records[0].predicted_labels["Against/For"] = {"For", 0.7};
  CHECK(validate(ok).empty());

  Corpus robot = ok;
  robot.records[0].gold_labels["Gender"] = "Robot";
  auto v = validate(robot);
  REQUIRE(v.size() == 1);
  CHECK(v[0].record_id == "a");
  CHECK(v[0].field == "gold_labels.Gender");

  Corpus prob = ok;
  prob.records[0].predicted_labels["Against/For"].prob = 1.5;
  v = validate(prob);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "predicted_labels.Against/For");

  Corpus dup = corpus_of({record("a", "x"), record("a", "y")});
  CHECK(validate(dup).size() == 1);
  Corpus unknown_attr = ok;
  unknown_attr.records[0].gold_labels["Mood"] = "Happy";
  CHECK(validate(unknown_attr).size() == 1);
}

TEST_CASE("schema sidecar overrides the default schemas") {
  TempDir dir;
  Corpus c;
  c.schemas = {{"Mood", {"Happy", "Sad"}, AttributeKind::Conversational}};
  c.records = {record("a", "x")};
  c.records[0].gold_labels["Mood"] = "Sad";
  c.provenance = "unit test";
  write_corpus(c, dir / "mood.jsonl");
  CHECK(load_corpus(dir / "mood.jsonl") == c);
  CHECK_THROWS_AS(schemas_from_json(nlohmann::json::parse(R"({"attributes":[{"name":"X","values":[]}]})")),
                  ParseError);
  CHECK_THROWS_AS(
      schemas_from_json(nlohmann::json::parse(R"({"attributes":[{"name":"X","values":["a","a"]}]})")),
      ParseError);
}
