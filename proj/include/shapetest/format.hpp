#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace shapetest {

// Shortest decimal text that parses back to the same double. Locale-free.
inline std::string format_double(double x)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc()) {
        return "nan";
    }
    return std::string(buf, ptr);
}

}  // namespace shapetest
