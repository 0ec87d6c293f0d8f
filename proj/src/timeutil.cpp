#include "ampguard/timeutil.hpp"

#include <cstdio>
#include <stdexcept>

namespace ampguard {

namespace {

constexpr std::int64_t kDaysPerEra = 146097;  // 400 Gregorian years

// Civil-from-days / days-from-civil per Howard Hinnant's algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * kDaysPerEra + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - kDaysPerEra + 1) / kDaysPerEra;
    const unsigned doe = static_cast<unsigned>(z - era * kDaysPerEra);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

CalendarTime to_calendar(EpochSeconds t) {
    std::int64_t days = t / kSecondsPerDay;
    std::int64_t rem = t % kSecondsPerDay;
    if (rem < 0) {
        rem += kSecondsPerDay;
        --days;
    }
    CalendarTime c{};
    civil_from_days(days, c.year, c.month, c.day);
    c.hour = static_cast<int>(rem / 3600);
    c.minute = static_cast<int>((rem / 60) % 60);
    c.second = static_cast<int>(rem % 60);
    return c;
}

EpochSeconds from_calendar(const CalendarTime& c) {
    return days_from_civil(c.year, c.month, c.day) * kSecondsPerDay +
           c.hour * 3600 + c.minute * 60 + c.second;
}

EpochSeconds parse_iso8601(const std::string& s) {
    CalendarTime c{};
    char sep = 0;
    int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &c.year, &c.month, &c.day,
                        &sep, &c.hour, &c.minute, &c.second);
    if (n < 3 || c.month < 1 || c.month > 12 || c.day < 1 || c.day > 31)
        throw std::invalid_argument("bad ISO-8601 timestamp: '" + s + "'");
    if (n >= 4 && sep != 'T' && sep != ' ')
        throw std::invalid_argument("bad ISO-8601 timestamp: '" + s + "'");
    if (n != 3 && n != 7)
        throw std::invalid_argument("bad ISO-8601 timestamp: '" + s + "'");
    return from_calendar(c);
}

std::string format_iso8601(EpochSeconds t) {
    CalendarTime c = to_calendar(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d", c.year, c.month,
                  c.day, c.hour, c.minute, c.second);
    return buf;
}

double hour_of_day(EpochSeconds t) {
    std::int64_t rem = t % kSecondsPerDay;
    if (rem < 0) rem += kSecondsPerDay;
    return static_cast<double>(rem) / 3600.0;
}

}  // namespace ampguard
