#pragma once

#include <string>
#include <string_view>
#include <vector>

// Unicode helpers shared by tokenization, name normalization and hashing.
// All strings are UTF-8; invalid sequences are replaced with U+FFFD.
namespace enrich::text {

std::string nfc(std::string_view utf8);

std::string to_lower(std::string_view utf8);

// NFC, lowercase, trim, and collapse every whitespace run to one ASCII space.
std::string normalize_name(std::string_view full_name);

// First whitespace-delimited token of normalize_name(full_name).
std::string given_name(std::string_view full_name);

bool is_url(std::string_view chunk);

inline constexpr std::string_view kUrlToken = "<url>";

struct TokenizeOptions {
  bool lowercase = true;
};

// Word tokens: split on runs of code points that are neither letters,
// digits nor apostrophes. Whitespace chunks that look like URLs become
// "<url>". Apostrophes at token edges are trimmed.
std::vector<std::string> tokenize(std::string_view utf8, TokenizeOptions opts = {});

// Code points of an NFC string, each re-encoded as UTF-8.
std::vector<std::string> code_points(std::string_view utf8);

std::string hex_encode(std::string_view bytes);

// HMAC-SHA256(key, message), lowercase hex.
std::string hmac_sha256_hex(std::string_view key, std::string_view message);

std::string sha256_hex(std::string_view message);

}  // namespace enrich::text
