#pragma once

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <string>
#include <string_view>
#include <vector>

#include "scichal/error.hpp"

// UTF-8 text utilities shared by ingestion, lexicon matching and entity
// linking. All functions are pure and thread-safe.
namespace scichal::text {

inline std::string nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) fail(ErrorCode::kIo, "ICU NFC normalizer unavailable");
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  icu::UnicodeString out = norm->normalize(in, status);
  if (U_FAILURE(status)) fail(ErrorCode::kValidation, "NFC normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

inline std::string lower(std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.toLower(icu::Locale::getRoot());
  std::string result;
  u.toUTF8String(result);
  return result;
}

// Ill-formed sequences decode to U+FFFD.
inline std::vector<UChar32> codepoints(std::string_view s) {
  std::vector<UChar32> out;
  out.reserve(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    UChar32 c;
    U8_NEXT(bytes, i, len, c);
    out.push_back(c < 0 ? 0xFFFD : c);
  }
  return out;
}

inline void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), n, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(n));
}

inline std::string to_utf8(const std::vector<UChar32>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (UChar32 c : cps) append_utf8(out, c);
  return out;
}

inline bool is_space(UChar32 c) { return u_isUWhiteSpace(c); }

// Whitespace tokenization after NFC normalization. This defines the token
// count used by the length filters.
inline std::vector<std::string> whitespace_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (UChar32 c : codepoints(nfc(s))) {
    if (is_space(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      append_utf8(current, c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline std::size_t token_count(std::string_view s) {
  return whitespace_tokens(s).size();
}

// Lowercased alphanumeric runs. Punctuation and symbols separate words, so
// "However," yields "however" and "ACE-2" yields {"ace", "2"}.
inline std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> words;
  std::string current;
  for (UChar32 c : codepoints(lower(nfc(s)))) {
    if (u_isalnum(c)) {
      append_utf8(current, c);
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

// Matching key for names: NFC, lowercase, punctuation removed, whitespace
// runs collapsed to one space and trimmed. "ACE-2" and "ace2" share a key.
inline std::string normalize_key(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (UChar32 c : codepoints(lower(nfc(s)))) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (u_ispunct(c)) continue;
    if (pending_space) out.push_back(' ');
    pending_space = false;
    append_utf8(out, c);
  }
  return out;
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace scichal::text
