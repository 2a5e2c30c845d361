#pragma once

#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <optional>
#include <string>

namespace gapfill {

/// Shortest decimal form with 17 significant digits; round-trips doubles exactly.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Strict double parse: the whole token must be consumed.
inline std::optional<double> parse_double(const std::string& tok) {
    if (tok.empty()) return std::nullopt;
    const char* begin = tok.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + tok.size()) return std::nullopt;
    if (std::isnan(v)) return std::nullopt;
    return v;
}

/// Strict integer parse (used for epoch-hour timestamps).
inline std::optional<long long> parse_int(const std::string& tok) {
    if (tok.empty()) return std::nullopt;
    const char* begin = tok.c_str();
    char* end = nullptr;
    long long v = std::strtoll(begin, &end, 10);
    if (end != begin + tok.size()) return std::nullopt;
    return v;
}

} // namespace gapfill
