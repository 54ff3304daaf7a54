#pragma once

#include <cstdint>

namespace gapsoup {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen as the repo-wide generator
// because its output is fixed by the algorithm alone, so runs reproduce
// bit-exactly across compilers and standard libraries.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Standard normal via Box-Muller; one value per call, cached pair.
    double next_gaussian();

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t next_below(std::uint64_t n);

    // Derive an independent stream for a sub-task (run index, split name, ...).
    static std::uint64_t split(std::uint64_t master_seed, std::uint64_t index) {
        SplitMix64 g(master_seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
        return g.next_u64();
    }

private:
    std::uint64_t state_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace gapsoup
