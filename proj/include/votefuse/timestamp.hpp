#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace votefuse {

/// Naive instant with millisecond resolution (no timezone).
struct Timestamp {
  std::int64_t ms = 0;

  auto operator<=>(const Timestamp&) const = default;
};

/// Non-negative span of time in milliseconds.
struct Duration {
  std::int64_t ms = 0;

  auto operator<=>(const Duration&) const = default;
};

namespace detail {

inline bool parse_digits(std::string_view s, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < count; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses "YYYY-MM-DD[ T]HH:MM:SS[.f{1,3}]" or a bare "YYYY-MM-DD".
inline std::optional<Timestamp> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  auto s = detail::trim(text);
  int y, mo, d, h = 0, mi = 0, sec = 0, frac = 0;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!detail::parse_digits(s, 0, 4, y) || !detail::parse_digits(s, 5, 2, mo) ||
      !detail::parse_digits(s, 8, 2, d))
    return std::nullopt;
  if (s.size() > 10) {
    if ((s[10] != ' ' && s[10] != 'T') || s.size() < 19 || s[13] != ':' || s[16] != ':')
      return std::nullopt;
    if (!detail::parse_digits(s, 11, 2, h) || !detail::parse_digits(s, 14, 2, mi) ||
        !detail::parse_digits(s, 17, 2, sec))
      return std::nullopt;
    if (s.size() > 19) {
      if (s[19] != '.') return std::nullopt;
      auto digits = s.size() - 20;
      if (digits < 1 || digits > 3 || !detail::parse_digits(s, 20, digits, frac))
        return std::nullopt;
      for (auto i = digits; i < 3; ++i) frac *= 10;
    }
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) return std::nullopt;
  auto days = sys_days{ymd}.time_since_epoch().count();
  std::int64_t ms = ((static_cast<std::int64_t>(days) * 24 + h) * 60 + mi) * 60 + sec;
  return Timestamp{ms * 1000 + frac};
}

/// Formats as "YYYY-MM-DD HH:MM:SS.fff".
inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  std::int64_t ms = t.ms;
  std::int64_t day_ms = 86'400'000;
  std::int64_t days = ms / day_ms;
  std::int64_t rem = ms % day_ms;
  if (rem < 0) {
    rem += day_ms;
    --days;
  }
  year_month_day ymd{sys_days{std::chrono::days{days}}};
  auto h = rem / 3'600'000;
  auto mi = (rem / 60'000) % 60;
  auto s = (rem / 1000) % 60;
  auto f = rem % 1000;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02lld:%02lld:%02lld.%03lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(h), static_cast<long long>(mi), static_cast<long long>(s),
                static_cast<long long>(f));
  return buf;
}

/// Parses "250ms", "1s", "15m", "1h", "1d" or a bare integer (milliseconds).
inline std::optional<Duration> parse_duration(std::string_view text) {
  auto s = detail::trim(text);
  std::size_t i = 0;
  std::int64_t v = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
    v = v * 10 + (s[i] - '0');
    ++i;
  }
  if (i == 0) return std::nullopt;
  auto unit = s.substr(i);
  std::int64_t scale = 0;
  if (unit.empty() || unit == "ms") scale = 1;
  else if (unit == "s") scale = 1000;
  else if (unit == "m" || unit == "min") scale = 60'000;
  else if (unit == "h") scale = 3'600'000;
  else if (unit == "d") scale = 86'400'000;
  else return std::nullopt;
  return Duration{v * scale};
}

}  // namespace votefuse
