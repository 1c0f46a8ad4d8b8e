#include "enrich/text.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <array>

#include "enrich/error.hpp"

namespace enrich::text {
namespace {

icu::UnicodeString to_unicode(std::string_view utf8) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
}

std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

const icu::Normalizer2& nfc_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw Error("ICU NFC normalizer unavailable");
  return *n;
}

icu::UnicodeString normalized(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = nfc_instance().normalize(to_unicode(utf8), status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  return out;
}

bool is_apostrophe(UChar32 c) { return c == 0x27 || c == 0x2019 || c == 0x02BC; }

bool is_word_char(UChar32 c) { return u_isalpha(c) || u_isdigit(c) || is_apostrophe(c); }

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(buf, len, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

template <typename Fn>
void for_each_code_point(std::string_view s, Fn&& fn) {
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    UChar32 c = 0;
    U8_NEXT(p, i, len, c);
    fn(c < 0 ? UChar32{0xFFFD} : c);
  }
}

std::string trim_apostrophes(std::string tok) {
  // Edge apostrophes are 1-byte ASCII or 2/3-byte sequences; strip by code point.
  std::vector<UChar32> cps;
  for_each_code_point(tok, [&](UChar32 c) { cps.push_back(c); });
  std::size_t b = 0, e = cps.size();
  while (b < e && is_apostrophe(cps[b])) ++b;
  while (e > b && is_apostrophe(cps[e - 1])) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i) append_utf8(out, cps[i]);
  return out;
}

}  // namespace

std::string nfc(std::string_view utf8) { return to_utf8(normalized(utf8)); }

std::string to_lower(std::string_view utf8) {
  icu::UnicodeString s = to_unicode(utf8);
  s.toLower(icu::Locale::getRoot());
  return to_utf8(s);
}

std::string normalize_name(std::string_view full_name) {
  icu::UnicodeString s = normalized(full_name);
  s.toLower(icu::Locale::getRoot());
  std::string lowered = to_utf8(s);
  std::string out;
  bool pending_space = false;
  for_each_code_point(lowered, [&](UChar32 c) {
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.empty();
      return;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    append_utf8(out, c);
  });
  return out;
}

std::string given_name(std::string_view full_name) {
  std::string n = normalize_name(full_name);
  auto sp = n.find(' ');
  return sp == std::string::npos ? n : n.substr(0, sp);
}

bool is_url(std::string_view chunk) {
  std::string lower = to_lower(chunk);
  std::string_view v(lower);
  return v.starts_with("http://") || v.starts_with("https://") || v.starts_with("www.");
}

std::vector<std::string> tokenize(std::string_view utf8, TokenizeOptions opts) {
  icu::UnicodeString s = normalized(utf8);
  if (opts.lowercase) s.toLower(icu::Locale::getRoot());
  const std::string prepared = to_utf8(s);

  std::vector<std::string> tokens;
  std::string chunk;
  auto flush_chunk = [&] {
    if (chunk.empty()) return;
    if (is_url(chunk)) {
      tokens.emplace_back(kUrlToken);
    } else {
      std::string cur;
      auto flush_token = [&] {
        if (cur.empty()) return;
        std::string t = trim_apostrophes(std::move(cur));
        if (!t.empty()) tokens.push_back(std::move(t));
        cur.clear();
      };
      for_each_code_point(chunk, [&](UChar32 c) {
        if (is_word_char(c)) {
          append_utf8(cur, c);
        } else {
          flush_token();
        }
      });
      flush_token();
    }
    chunk.clear();
  };
  for_each_code_point(prepared, [&](UChar32 c) {
    if (u_isUWhiteSpace(c)) {
      flush_chunk();
    } else {
      append_utf8(chunk, c);
    }
  });
  flush_chunk();
  return tokens;
}

std::vector<std::string> code_points(std::string_view utf8) {
  std::vector<std::string> out;
  for_each_code_point(nfc(utf8), [&](UChar32 c) {
    std::string cp;
    append_utf8(cp, c);
    out.push_back(std::move(cp));
  });
  return out;
}

std::string hex_encode(std::string_view bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

std::string hmac_sha256_hex(std::string_view key, std::string_view message) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
           reinterpret_cast<const unsigned char*>(message.data()), message.size(), digest.data(),
           &len) == nullptr) {
    throw Error("HMAC-SHA256 failed");
  }
  return hex_encode(std::string_view(reinterpret_cast<const char*>(digest.data()), len));
}

std::string sha256_hex(std::string_view message) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(message.data(), message.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  return hex_encode(std::string_view(reinterpret_cast<const char*>(digest.data()), len));
}

}  // namespace enrich::text
