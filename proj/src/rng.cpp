#include "gapsoup/rng.hpp"

#include <cmath>

namespace gapsoup {

double SplitMix64::next_gaussian() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // Box-Muller on two fresh uniforms; u1 kept away from 0.
    double u1;
    do {
        u1 = next_double();
    } while (u1 <= 0.0);
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
}

std::uint64_t SplitMix64::next_below(std::uint64_t n) {
    // Rejection sampling over a power-of-two envelope keeps the draw unbiased.
    std::uint64_t mask = ~0ULL;
    if (n == 0) return 0;
    std::uint64_t limit = ~0ULL - (~0ULL % n);
    std::uint64_t x;
    do {
        x = next_u64() & mask;
    } while (x >= limit);
    return x % n;
}

}  // namespace gapsoup
