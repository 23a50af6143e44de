#include "oracles/geo_calendar_oracle.hpp"

#include <cmath>

namespace oracle {

double haversine_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg) {
  const double to_rad = M_PI / 180.0;
  const double p1 = lat1_deg * to_rad;
  const double p2 = lat2_deg * to_rad;
  const double dp = (lat2_deg - lat1_deg) * to_rad;
  const double dl = (lon2_deg - lon1_deg) * to_rad;
  const double a = std::pow(std::sin(dp / 2), 2) + std::cos(p1) * std::cos(p2) * std::pow(std::sin(dl / 2), 2);
  const double c = 2 * std::atan2(std::sqrt(a), std::sqrt(1 - a));
  return 6371.0 * c;
}

bool is_leap(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

std::int64_t days_since_epoch(int year, int month, int day) {
  static const int kMonthDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  std::int64_t days = 0;
  if (year >= 1970) {
    for (int y = 1970; y < year; ++y) days += is_leap(y) ? 366 : 365;
  } else {
    for (int y = year; y < 1970; ++y) days -= is_leap(y) ? 366 : 365;
  }
  for (int m = 1; m < month; ++m) days += kMonthDays[m - 1] + (m == 2 && is_leap(year) ? 1 : 0);
  return days + (day - 1);
}

}  // namespace oracle
