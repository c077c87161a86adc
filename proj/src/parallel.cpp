#include "shapetest/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace shapetest {

unsigned default_workers()
{
    if (const char* env = std::getenv("SHAPETEST_WORKERS")) {
        unsigned value = 0;
        const char* end = env + std::strlen(env);
        auto [ptr, ec] = std::from_chars(env, end, value);
        if (ec == std::errc{} && ptr == end && value > 0) {
            return value;
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace shapetest
