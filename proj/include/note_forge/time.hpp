#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace note_forge {

// Seconds since 1970-01-01 00:00:00, proleptic Gregorian, no time zone.
// MIMIC dates are shifted into the 2100-2200 range, so 64 bits are required.
struct Timestamp {
  std::int64_t seconds = 0;

  auto operator<=>(const Timestamp&) const = default;
};

// Days since 1970-01-01.
struct Date {
  std::int64_t days = 0;

  auto operator<=>(const Date&) const = default;
};

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d);
void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d);

// "YYYY-MM-DD HH:MM:SS"
std::optional<Timestamp> parse_timestamp(std::string_view text);
// "YYYY-MM-DD"; "YYYY-MM-DD 00:00:00" is accepted as well.
std::optional<Date> parse_date(std::string_view text);

std::string format_timestamp(Timestamp t);        // YYYY-MM-DD HH:MM:SS
std::string format_timestamp_minutes(Timestamp t);  // YYYY-MM-DD HH:MM
std::string format_date(Date d);                   // YYYY-MM-DD

inline Timestamp start_of(Date d) { return Timestamp{d.days * kSecondsPerDay}; }

inline Date date_of(Timestamp t) {
  std::int64_t days = t.seconds / kSecondsPerDay;
  if (t.seconds % kSecondsPerDay < 0) --days;
  return Date{days};
}

}  // namespace note_forge
