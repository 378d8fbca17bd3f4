#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace specsense {

/// Shortest decimal representation of a double that parses back to exactly
/// the same value (tries increasing precision until the round trip is exact).
/// Infinities render as "inf"/"-inf", NaN as "nan". Used for CSV and metadata
/// output so files are both human-readable and lossless.
inline std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[64];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
        if (std::strtod(buffer, nullptr) == value) break;
    }
    return buffer;
}

}  // namespace specsense
