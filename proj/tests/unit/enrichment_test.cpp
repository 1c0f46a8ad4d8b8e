#include <doctest.h>

#include <atomic>
#include <map>
#include <random>
#include <set>

#include "enrich/enrichment.hpp"
#include "enrich/error.hpp"
#include "enrich/io.hpp"
#include "enrich/text.hpp"
#include "support.hpp"

using namespace enrich;
using nlohmann::json;
using testsupport::corpus_of;
using testsupport::record;

namespace {

NameGenderDB toy_db() {
  return parse_name_db("Mary,F,7065\nMary,M,30\nTaylor,F,4800\nTaylor,M,5200\n");
}

class FixedProvider : public EthnicityProvider {
 public:
  EthnicityPath lookup(const std::string& name) override {
    ++calls;
    if (name.find("gomez") != std::string::npos) return parse_ethnicity_path("GreaterEuropean-WestEuropean-Hispanic", 0.9);
    return {};
  }
  int calls = 0;
};

// Recorded responses keyed by the requested URL.
struct RecordedHttp {
  std::map<std::string, HttpResult> responses;
  std::atomic<int> calls{0};

  HttpGet get() {
    return [this](const std::string& url) {
      ++calls;
      auto it = responses.find(url);
      return it == responses.end() ? HttpResult{404, ""} : it->second;
    };
  }
};

}  // namespace

TEST_CASE("name DB sums counts over lines and normalizes names") {
  auto db = parse_name_db("Mary,F,7065\nMary,F,100\nmary,M,0,1990\n");
  auto mary = db.lookup("mary");
  REQUIRE(mary.has_value());
  CHECK(mary->female == 7165);
  CHECK(mary->male == 0);
  CHECK(db.lookup("MARY").has_value() == db.lookup("mary").has_value());

  auto empty = parse_name_db("");
  CHECK(empty.size() == 0);
  CHECK(infer_gender("Mary Smith", empty) == Gender::Unknown);
}

TEST_CASE("name DB parse errors name the line") {
  CHECK_THROWS_AS(parse_name_db("Mary,X,5\n"), ParseError);
  try {
    parse_name_db("Mary,F,5\nJohn,M,lots\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_name_db("Mary,F\n"), ParseError);
}

TEST_CASE("gender rule examples") {
  auto db = toy_db();
  CHECK(infer_gender("Mary Smith", db) == Gender::Female);
  CHECK(infer_gender("Taylor Jones", db) == Gender::Unknown);
  CHECK(infer_gender("Zebulon Pike", db) == Gender::Unknown);
  CHECK(infer_gender("  MARY   smith", db) == Gender::Female);
  CHECK(infer_gender("", db) == Gender::Unknown);
  CHECK(infer_gender("Taylor Jones", db, 0.51) == Gender::Male);
  CHECK_THROWS_AS(infer_gender("Mary", db, 0.5), ValidationError);
  CHECK_THROWS_AS(infer_gender("Mary", db, 1.01), ValidationError);
}

TEST_CASE("property: threshold monotonicity") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> thr(0.5000001, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    NameGenderDB db;
    db.add("pat", 'F', rng() % 1000);
    db.add("pat", 'M', 1 + rng() % 1000);
    double t = thr(rng), lower = thr(rng);
    if (lower > t) std::swap(lower, t);
    const Gender at_t = infer_gender("Pat Doe", db, t);
    if (at_t != Gender::Unknown) CHECK(infer_gender("Pat Doe", db, lower) == at_t);
  }
}

TEST_CASE("ethnicity taxonomy and path parsing") {
  CHECK(ethnicity_taxonomy().size() == 13);
  auto p = parse_ethnicity_path("GreaterEuropean-WestEuropean-Hispanic", 0.8);
  CHECK(p.levels == std::vector<std::string>{"GreaterEuropean", "WestEuropean", "Hispanic"});
  CHECK(p.joined() == "GreaterEuropean-WestEuropean-Hispanic");
  CHECK(parse_ethnicity_path("GreaterEuropean,British", 0.7).levels ==
        std::vector<std::string>{"GreaterEuropean", "British"});
  CHECK(parse_ethnicity_path("Martian-Valley", 0.9).unknown());
  CHECK(parse_ethnicity_path("", 0.9).unknown());
  CHECK(is_valid_path(std::vector<std::string>{"Asian"}));
  CHECK_FALSE(is_valid_path(std::vector<std::string>{"Asian", "British"}));
  CHECK(is_valid_path(std::vector<std::string>{"Unknown"}));
}

TEST_CASE("provider responses pick the most probable path above the cutoff") {
  auto r = ethnicity_from_response(json{{"GreaterEuropean,WestEuropean,Hispanic", 0.7},
                                        {"GreaterEuropean,British", 0.2}});
  CHECK(r.joined() == "GreaterEuropean-WestEuropean-Hispanic");
  CHECK(r.confidence == 0.7);
  CHECK(ethnicity_from_response(json{{"GreaterEuropean,British", 0.4}, {"Asian,IndianSubContinent", 0.3}}).unknown());
  CHECK(ethnicity_from_response(json::object()).unknown());
  CHECK(ethnicity_from_response(json{{"Nowhere", 0.99}}).unknown());
}

TEST_CASE("remote provider: encoding, caching, dedup and failures") {
  testsupport::TempDir dir;
  RecordedHttp http;
  const std::string tmpl = "http://names.test/api?name={name}";
  http.responses[tmpl.substr(0, tmpl.find('{')) + url_encode("maria gomez")] = {
      200, json{{"GreaterEuropean,WestEuropean,Hispanic", 0.93}}.dump()};
  http.responses[tmpl.substr(0, tmpl.find('{')) + url_encode("bad json")] = {200, "{not json"};

  RemoteEthnicityProvider provider(tmpl, http.get(), dir / "cache.jsonl", 2);
  auto first = provider.lookup("maria gomez");
  CHECK(first.joined() == "GreaterEuropean-WestEuropean-Hispanic");
  CHECK(first.confidence == doctest::Approx(0.93));
  auto second = provider.lookup("maria gomez");
  CHECK(second == first);
  CHECK(provider.requests_made() == 1);

  CHECK(provider.lookup("no such person").unknown());
  CHECK(provider.lookup("bad json").unknown());
  CHECK(provider.failures().size() == 2);

  // A new provider on the same cache file answers without the network.
  RecordedHttp offline;
  RemoteEthnicityProvider cached(tmpl, offline.get(), dir / "cache.jsonl");
  CHECK(cached.lookup("maria gomez") == first);
  CHECK(offline.calls == 0);
  // The cache stores hashed names only.
  CHECK(io::read_file(dir / "cache.jsonl").find("gomez") == std::string::npos);
  CHECK(io::read_file(dir / "cache.jsonl").find(text::sha256_hex("maria gomez")) != std::string::npos);
}

TEST_CASE("remote provider: lookup_many issues one request per unique name") {
  RecordedHttp http;
  const std::string tmpl = "http://names.test/{name}";
  for (const auto* n : {"a one", "b two", "c three"}) {
    http.responses["http://names.test/" + url_encode(n)] = {200, json{{"GreaterEuropean,British", 0.8}}.dump()};
  }
  RemoteEthnicityProvider provider(tmpl, http.get(), std::nullopt, 3);
  std::vector<std::string> names = {"a one", "b two", "a one", "c three", "b two", "zzz"};
  auto out = provider.lookup_many(names);
  REQUIRE(out.size() == names.size());
  CHECK(http.calls == 4);
  CHECK(out[0] == out[2]);
  CHECK(out[0].joined() == "GreaterEuropean-British");
  CHECK(out[5].unknown());
  CHECK(url_encode("a b/ç") == "a%20b%2F%C3%A7");
  CHECK_THROWS_AS(RemoteEthnicityProvider("http://no-placeholder", http.get()), ValidationError);
}

TEST_CASE("local provider learns a separable suffix rule") {
  std::vector<std::pair<std::string, std::string>> train;
  const std::vector<std::string> given = {"maria", "jose", "ana", "luis", "carmen", "pedro"};
  for (const auto* s : {"rodriguez", "hernandez", "lopez", "martinez", "sanchez", "perez", "fernandez"}) {
    for (const auto& g : given) train.emplace_back(g + " " + s, "GreaterEuropean-WestEuropean-Hispanic");
  }
  for (const auto* s : {"smith", "brown", "wright", "walker", "hall", "clarke", "thompson"}) {
    for (const auto& g : given) train.emplace_back(g + " " + s, "GreaterEuropean-British");
  }
  auto provider = LocalEthnicityProvider::train(train);
  auto p = provider.lookup(text::normalize_name("Gomez"));
  CHECK(p.joined() == "GreaterEuropean-WestEuropean-Hispanic");
  CHECK(p.confidence >= 0.5);
  CHECK(provider.lookup(text::normalize_name("Rosa Dominguez")).joined() == "GreaterEuropean-WestEuropean-Hispanic");

  std::vector<std::pair<std::string, std::string>> bad = {{"x y", "Martian"}};
  CHECK_THROWS_AS(LocalEthnicityProvider::train(bad), ValidationError);
}

TEST_CASE("enrich: toy corpus counts and conservation") {
  Corpus c = corpus_of({record("1", "x"), record("2", "y"), record("3", "z")});
  c.records[0].author_name = "Mary Smith";
  c.records[1].author_name = "Taylor Jones";
  c.records[2].author_name = "Maria Gomez";
  FixedProvider provider;
  auto res = enrich::enrich(c, toy_db(), provider);
  CHECK(res.summary.gender == std::map<std::string, std::size_t>{{"Female", 1}, {"Unknown", 2}});
  CHECK(res.corpus.records[0].enriched.gender_pred == "Female");
  CHECK(res.corpus.records[2].enriched.ethnicity_path ==
        std::vector<std::string>{"GreaterEuropean", "WestEuropean", "Hispanic"});
  CHECK(res.corpus.records[0].enriched.ethnicity_path == std::vector<std::string>{"Unknown"});
  CHECK(res.summary.gender_total() == 3);
  CHECK(res.summary.ethnicity_total() == 3);

  Corpus nameless = corpus_of({record("a", "x"), record("b", "y")});
  FixedProvider p2;
  auto none = enrich::enrich(nameless, toy_db(), p2);
  CHECK(none.summary.gender == std::map<std::string, std::size_t>{{"Unknown", 2}});
  CHECK(none.summary.ethnicity_total() == 2);
  CHECK(p2.calls == 0);
}

TEST_CASE("enrichment table layout") {
  Corpus c = corpus_of({record("1", "x"), record("2", "y")});
  c.records[0].author_name = "Mary Smith";
  c.records[1].author_name = "Maria Gomez";
  FixedProvider provider;
  auto res = enrich::enrich(c, toy_db(), provider);
  auto rows = enrichment_rows(res.summary);
  CHECK(rows.front().first == "Ethnicity=Unknown");
  CHECK(rows.size() == 1 + 13 + 3);
  CHECK(rows[rows.size() - 3].first == "Gender=Male");
  std::vector<std::pair<std::string, EnrichmentSummary>> sets = {{"full", res.summary}};
  auto table = render_enrichment_table(sets);
  CHECK(table.find("Gender=Female") != std::string::npos);
  CHECK(table.find("GreaterEuropean-WestEuropean-Hispanic") != std::string::npos);
}
