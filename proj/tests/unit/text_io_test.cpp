#include <doctest.h>

#include <string>
#include <vector>

#include "enrich/error.hpp"
#include "enrich/io.hpp"
#include "enrich/text.hpp"
#include "support.hpp"

using namespace enrich;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenize: punctuation, apostrophes and URLs") {
  CHECK(text::tokenize("Free college NOW!!") == Tokens{"free", "college", "now"});
  CHECK(text::tokenize("don't stop") == Tokens{"don't", "stop"});
  CHECK(text::tokenize("see http://a.b/c now") == Tokens{"see", "<url>", "now"});
  CHECK(text::tokenize("").empty());
  CHECK(text::tokenize("   ...  ").empty());
}

TEST_CASE("tokenize: case option, edge apostrophes and non-ASCII letters") {
  CHECK(text::tokenize("Free College", {.lowercase = false}) == Tokens{"Free", "College"});
  CHECK(text::tokenize("'quoted' words'") == Tokens{"quoted", "words"});
  CHECK(text::tokenize("Éducation GRATUITE") == Tokens{"éducation", "gratuite"});
  CHECK(text::tokenize("www.example.com rocks") == Tokens{"<url>", "rocks"});
}

TEST_CASE("tokenize applies NFC so composed and decomposed forms agree") {
  const std::string composed = "caf\xC3\xA9";     // é as one code point
  const std::string decomposed = "cafe\xCC\x81";  // e + combining acute
  CHECK(text::tokenize(composed) == text::tokenize(decomposed));
}

TEST_CASE("name normalization collapses case and whitespace") {
  CHECK(text::normalize_name("  John   SMITH ") == "john smith");
  CHECK(text::normalize_name("John\tSmith") == "john smith");
  CHECK(text::given_name("Mary  Ann Smith") == "mary");
  CHECK(text::given_name("") == "");
}

TEST_CASE("hashing helpers match known vectors") {
  CHECK(text::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  // RFC 4231 test case 2.
  CHECK(text::hmac_sha256_hex("Jefe", "what do ya want for nothing?") ==
        "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
  CHECK(text::hex_encode(std::string("\x01\xff", 2)) == "01ff");
}

TEST_CASE("code points are split on character boundaries") {
  CHECK(text::code_points("añb") == Tokens{"a", "ñ", "b"});
}

TEST_CASE("CSV parsing handles quotes, embedded newlines and line numbers") {
  auto rows = io::parse_csv("a,b\n\"x, y\",\"he said \"\"hi\"\"\"\n\"multi\nline\",z\nlast,row\n");
  REQUIRE(rows.size() == 4);
  CHECK(rows[1].fields == io::CsvRow{"x, y", "he said \"hi\""});
  CHECK(rows[2].fields == io::CsvRow{"multi\nline", "z"});
  CHECK(rows[2].line == 3);
  CHECK(rows[3].line == 5);
  CHECK_THROWS_AS(io::parse_csv("a,\"unterminated\n"), ParseError);
}

TEST_CASE("CSV escaping round-trips") {
  const io::CsvRow row{"plain", "with,comma", "with \"quote\"", "new\nline", ""};
  auto parsed = io::parse_csv(io::csv_join(row) + "\n");
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].fields == row);
}

TEST_CASE("atomic write replaces content and append adds lines") {
  testsupport::TempDir dir;
  auto p = dir / "sub/out.txt";
  io::write_file_atomic(p, "first");
  io::write_file_atomic(p, "second");
  CHECK(io::read_file(p) == "second");
  io::append_line(dir / "log.jsonl", "{\"a\":1}");
  io::append_line(dir / "log.jsonl", "{\"a\":2}");
  CHECK(io::read_file(dir / "log.jsonl") == "{\"a\":1}\n{\"a\":2}\n");
  CHECK_THROWS_AS(io::read_file(dir / "missing.txt"), IoError);
}
