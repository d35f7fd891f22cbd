#include "reslab/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace reslab {

unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RESIDUAL_LAB_THREADS")) {
        unsigned v = 0;
        const char* end = env + std::strlen(env);
        const auto [ptr, ec] = std::from_chars(env, end, v);
        if (ec == std::errc() && ptr == end && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace reslab
