#pragma once

#include <cstdio>
#include <string>

namespace aniso::detail {

/// Shortest-safe decimal form: 17 significant digits round-trip every double.
inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace aniso::detail
