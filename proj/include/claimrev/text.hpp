#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "claimrev/error.hpp"

namespace claimrev::text {

namespace detail {

// Invokes fn(codepoint, begin, end) for each code point; ill-formed bytes
// arrive as negative code points so callers can keep them verbatim.
template <typename Fn>
void for_each_codepoint(std::string_view s, Fn&& fn) {
  const auto* data = reinterpret_cast<const uint8_t*>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t begin = i;
    UChar32 c;
    U8_NEXT(data, i, length, c);
    fn(c, static_cast<std::size_t>(begin), static_cast<std::size_t>(i));
  }
}

inline bool is_space(UChar32 c) { return c >= 0 && u_isUWhiteSpace(c); }
inline bool is_punct(UChar32 c) { return c >= 0 && u_ispunct(c); }

}  // namespace detail

/// Strips leading and trailing Unicode white space.
inline std::string_view trim(std::string_view s) {
  std::size_t first = s.size();
  std::size_t last = 0;
  detail::for_each_codepoint(s, [&](UChar32 c, std::size_t b, std::size_t e) {
    if (!detail::is_space(c)) {
      if (first == s.size()) first = b;
      last = e;
    }
  });
  if (first == s.size()) return {};
  return s.substr(first, last - first);
}

inline std::string nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(std::string("ICU NFC normalizer unavailable: ") + u_errorName(status));
  icu::UnicodeString input = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  icu::UnicodeString output = normalizer->normalize(input, status);
  if (U_FAILURE(status)) throw Error(std::string("NFC normalization failed: ") + u_errorName(status));
  std::string out;
  output.toUTF8String(out);
  return out;
}

/// Trimmed, NFC-normalized text; the key used for revert detection.
inline std::string normalize(std::string_view s) { return nfc(trim(s)); }

inline std::string to_lower(std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.toLower(icu::Locale::getRoot());
  std::string out;
  u.toUTF8String(out);
  return out;
}

/// Splits on Unicode white space and strips punctuation from both ends of
/// every piece. Inner punctuation ("state-of-the-art", "don't") survives.
inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t start = 0;
  bool in_word = false;
  auto flush = [&](std::size_t end) {
    std::string_view piece = s.substr(start, end - start);
    std::size_t first = piece.size();
    std::size_t last = 0;
    detail::for_each_codepoint(piece, [&](UChar32 c, std::size_t b, std::size_t e) {
      if (!detail::is_punct(c)) {
        if (first == piece.size()) first = b;
        last = e;
      }
    });
    if (first < piece.size()) words.emplace_back(piece.substr(first, last - first));
  };
  detail::for_each_codepoint(s, [&](UChar32 c, std::size_t b, std::size_t) {
    if (detail::is_space(c)) {
      if (in_word) flush(b);
      in_word = false;
    } else if (!in_word) {
      start = b;
      in_word = true;
    }
  });
  if (in_word) flush(s.size());
  return words;
}

}  // namespace claimrev::text
