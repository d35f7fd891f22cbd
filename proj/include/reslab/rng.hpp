#pragma once

#include <cstdint>
#include <string_view>

namespace reslab {

// Stafford's variant 13 finalizer, as used by splitmix64.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text,
                                std::uint64_t hash = 0xcbf29ce484222325ULL) {
    for (char ch : text) {
        hash ^= static_cast<unsigned char>(ch);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

// Seed for one unit of work, independent of scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                    std::uint64_t index, std::string_view kind = {}) {
    std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
    h = mix64(h ^ fnv1a64(tag));
    h = mix64(h ^ (index * 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ fnv1a64(kind));
    return h;
}

// Counter-based generator: output i is mix64(seed + (i+1)*gamma). The value
// streams are identical on every platform, unlike <random> distributions.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n); unbiased by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % n;
    }

private:
    std::uint64_t state_;
};

}  // namespace reslab
