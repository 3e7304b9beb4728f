#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace chainwatch {

/// UTC instant with microsecond precision, counted from the Unix epoch.
struct Timestamp {
  std::int64_t micros = 0;

  auto operator<=>(const Timestamp&) const = default;
};

/// Parses RFC 3339 ("2019-08-27T10:00:00.000001Z", "...+02:00", optional
/// fraction). Digits past microseconds are truncated. Returns nullopt on any
/// syntax or range error.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Canonical form: always six fractional digits and a trailing 'Z'.
std::string format_timestamp(Timestamp ts);

Timestamp now_utc();

}  // namespace chainwatch
