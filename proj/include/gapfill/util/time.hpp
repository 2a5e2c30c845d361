#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

namespace gapfill {

struct CivilTime {
    int year = 1970;
    int month = 1;   // 1..12
    int day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;
};

// Proleptic Gregorian day count (days since 1970-01-01).
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

inline std::int64_t epoch_seconds(const CivilTime& c) {
    return days_from_civil(c.year, c.month, c.day) * 86400LL + c.hour * 3600LL +
           c.minute * 60LL + c.second;
}

inline CivilTime civil_from_epoch_seconds(std::int64_t s) {
    std::int64_t days = s >= 0 ? s / 86400 : (s - 86399) / 86400;
    std::int64_t rem = s - days * 86400;
    CivilTime c;
    civil_from_days(days, c.year, c.month, c.day);
    c.hour = static_cast<int>(rem / 3600);
    c.minute = static_cast<int>((rem % 3600) / 60);
    c.second = static_cast<int>(rem % 60);
    return c;
}

/// Parses "YYYY-MM-DD HH:MM[:SS]" or with a 'T' separator. No timezone handling.
inline std::optional<CivilTime> parse_iso8601(const std::string& s) {
    CivilTime c;
    char sep = 0;
    int n = 0;
    int fields = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d%n", &c.year, &c.month, &c.day, &sep,
                             &c.hour, &c.minute, &c.second, &n);
    if (fields == 7 && (sep == ' ' || sep == 'T') && n == static_cast<int>(s.size())) {
        // fall through to validation
    } else {
        n = 0;
        fields = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d%n", &c.year, &c.month, &c.day, &sep,
                             &c.hour, &c.minute, &n);
        if (fields != 6 || (sep != ' ' && sep != 'T') || n != static_cast<int>(s.size()))
            return std::nullopt;
        c.second = 0;
    }
    if (c.month < 1 || c.month > 12 || c.day < 1 || c.day > 31) return std::nullopt;
    if (c.hour < 0 || c.hour > 23 || c.minute < 0 || c.minute > 59 || c.second < 0 || c.second > 60)
        return std::nullopt;
    return c;
}

inline std::string format_iso8601(const CivilTime& c) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", c.year, c.month, c.day,
                  c.hour, c.minute, c.second);
    return buf;
}

} // namespace gapfill
