#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace fuzzreg::detail {

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double_shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Fixed 17 significant digits.
inline std::string format_double_17g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace fuzzreg::detail
