#include "episodic/calendar.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>

namespace episodic {

namespace {

std::optional<unsigned> digits(std::string_view text, std::size_t count) {
  if (text.size() != count) return std::nullopt;
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

Granularity IsoDate::granularity() const {
  if (day) return Granularity::kDay;
  if (month) return Granularity::kMonth;
  return Granularity::kYear;
}

std::string IsoDate::to_string() const {
  char buffer[16];
  if (day) {
    std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02u", year, *month, *day);
  } else if (month) {
    std::snprintf(buffer, sizeof(buffer), "%04d-%02u", year, *month);
  } else {
    std::snprintf(buffer, sizeof(buffer), "%04d", year);
  }
  return buffer;
}

std::optional<IsoDate> parse_iso_date(std::string_view text) {
  IsoDate date;
  const auto year = digits(text.substr(0, 4), 4);
  if (!year) return std::nullopt;
  date.year = static_cast<int>(*year);
  if (text.size() == 4) return date;

  if (text.size() < 7 || text[4] != '-') return std::nullopt;
  const auto month = digits(text.substr(5, 2), 2);
  if (!month || *month < 1 || *month > 12) return std::nullopt;
  date.month = *month;
  if (text.size() == 7) return date;

  if (text.size() != 10 || text[7] != '-') return std::nullopt;
  const auto day = digits(text.substr(8, 2), 2);
  if (!day) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{date.year}, std::chrono::month{*month},
                                        std::chrono::day{*day}};
  if (!ymd.ok()) return std::nullopt;
  date.day = *day;
  return date;
}

std::int64_t to_unix_seconds(const IsoDate& date) {
  using namespace std::chrono;
  const year_month_day ymd{year{date.year}, month{date.month.value_or(1)}, day{date.day.value_or(1)}};
  const sys_days days{ymd};
  return static_cast<std::int64_t>(days.time_since_epoch().count()) * 86400;
}

IsoDate date_from_unix_seconds(std::int64_t seconds) {
  using namespace std::chrono;
  std::int64_t day_count = seconds / 86400;
  if (seconds % 86400 < 0) --day_count;
  const year_month_day ymd{sys_days{days{day_count}}};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day())};
}

std::string format_utc(std::int64_t seconds) {
  const auto date = date_from_unix_seconds(seconds);
  std::int64_t rem = seconds % 86400;
  if (rem < 0) rem += 86400;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", date.year, *date.month, *date.day,
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
  return buf;
}

std::string creation_timestamp() {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    std::int64_t seconds = 0;
    const auto* end = epoch + std::char_traits<char>::length(epoch);
    if (auto [ptr, ec] = std::from_chars(epoch, end, seconds); ec == std::errc() && ptr == end) {
      return format_utc(seconds);
    }
  }
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  return format_utc(now.time_since_epoch().count());
}

}  // namespace episodic
