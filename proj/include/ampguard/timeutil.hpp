#pragma once

#include <cstdint>
#include <string>

namespace ampguard {

/// Seconds since 1970-01-01T00:00:00 (no time zone; traces are local-naive).
using EpochSeconds = std::int64_t;

struct CalendarTime {
    int year;
    int month;  // 1..12
    int day;    // 1..31
    int hour;   // 0..23
    int minute;
    int second;
};

CalendarTime to_calendar(EpochSeconds t);
EpochSeconds from_calendar(const CalendarTime& c);

/// Parses "YYYY-MM-DDTHH:MM:SS" (a trailing 'Z' is accepted and ignored).
/// Throws std::invalid_argument on malformed input.
EpochSeconds parse_iso8601(const std::string& s);

std::string format_iso8601(EpochSeconds t);

/// Hour of day in [0, 24) including fractional minutes.
double hour_of_day(EpochSeconds t);

inline constexpr EpochSeconds kSecondsPerDay = 86400;
inline constexpr EpochSeconds kSecondsPerHour = 3600;

}  // namespace ampguard
