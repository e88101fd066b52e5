#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "claimrev/error.hpp"

namespace claimrev {

using Timestamp = std::chrono::sys_seconds;

namespace detail {

inline bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return ec == std::errc{} && ptr == s.data() + pos + len;
}

}  // namespace detail

/// Parses an ISO-8601 UTC timestamp such as `2020-06-26T00:00:00Z`.
///
/// Accepted: date-only (`2020-06-26`, midnight), `T` or space separator,
/// fractional seconds (truncated), and a `Z`, `+00:00` or `+0000` suffix.
/// Any other offset is rejected because all corpus times must be comparable.
inline Timestamp parse_timestamp(std::string_view text) {
  auto fail = [&](const char* why) -> Timestamp {
    throw ValidationError("invalid UTC timestamp '" + std::string(text) + "': " + why);
  };
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!detail::parse_fixed_int(text, 0, 4, y) || text.size() < 10 || text[4] != '-' ||
      !detail::parse_fixed_int(text, 5, 2, mo) || text[7] != '-' ||
      !detail::parse_fixed_int(text, 8, 2, d)) {
    return fail("expected YYYY-MM-DD");
  }
  std::size_t pos = 10;
  if (pos < text.size()) {
    if (text[pos] != 'T' && text[pos] != ' ') return fail("expected 'T' after date");
    if (!detail::parse_fixed_int(text, pos + 1, 2, h) || text.size() < pos + 9 ||
        text[pos + 3] != ':' || !detail::parse_fixed_int(text, pos + 4, 2, mi) ||
        text[pos + 6] != ':' || !detail::parse_fixed_int(text, pos + 7, 2, s)) {
      return fail("expected HH:MM:SS");
    }
    pos += 9;
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      std::size_t digits = 0;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
        ++pos;
        ++digits;
      }
      if (digits == 0) return fail("empty fractional seconds");
    }
    std::string_view zone = text.substr(pos);
    if (zone.empty()) return fail("missing UTC designator");
    if (zone != "Z" && zone != "z" && zone != "+00:00" && zone != "+0000" && zone != "-00:00") {
      return fail("only UTC offsets are accepted");
    }
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return fail("no such calendar date");
  if (h > 23 || mi > 59 || s > 60) return fail("time of day out of range");
  return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} +
         std::chrono::seconds{s};
}

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
inline std::string format_timestamp(Timestamp t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

}  // namespace claimrev
