#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "episodic/record.hpp"

namespace episodic {

/// A calendar date at day, month or year precision (proleptic Gregorian).
struct IsoDate {
  int year = 1970;
  std::optional<unsigned> month;
  std::optional<unsigned> day;  // only with month

  Granularity granularity() const;
  std::string to_string() const;
  bool operator==(const IsoDate&) const = default;
};

/// Accepts "YYYY", "YYYY-MM" or "YYYY-MM-DD" with real month/day ranges.
std::optional<IsoDate> parse_iso_date(std::string_view text);

/// Unix seconds at 00:00:00 UTC on the first day of the stated period.
std::int64_t to_unix_seconds(const IsoDate& date);

/// Inverse for day-precision dates; used for display.
IsoDate date_from_unix_seconds(std::int64_t seconds);

/// "YYYY-MM-DDTHH:MM:SSZ" for the given Unix seconds.
std::string format_utc(std::int64_t seconds);

/// Store creation time: $SOURCE_DATE_EPOCH when set, else the clock.
std::string creation_timestamp();

}  // namespace episodic
