#pragma once

#include <cstdint>

#include "base.hpp"

namespace perfhom {

// SplitMix64 step: the finalizer of Steele/Lea/Flood's splittable generator.
// All sampling randomness flows through this one primitive so realizations
// are bit-stable across platforms and standard libraries.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

// Splittable counter construction: derived seed i of a base seed.
// mix64(s, i) = splitmix64(s + (i+1) * golden_gamma). Documented bit-exactly
// in docs/FORMATS.md; study row seeds and generator substreams use this.
inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t i) {
    return splitmix64(seed + (i + 1) * 0x9E3779B97F4A7C15ull);
}

// Counter-mode stream over splitmix64: state advances by the golden gamma,
// outputs are finalized snapshots. Equivalent to the reference SplitMix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return splitmix64(state_);
    }

    // Uniform in [0,1): top 53 bits scaled by 2^-53.
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    bool bernoulli(double p) { return next_double() < p; }

    // Poisson by chunked Knuth multiplication: exact, deterministic, and safe
    // for large means (each chunk mean is <= 32 so exp() never underflows).
    std::uint64_t poisson(double mean) {
        if (!(mean >= 0.0)) throw DomainError("poisson: mean must be nonnegative");
        std::uint64_t total = 0;
        while (mean > 0.0) {
            const double chunk = mean > 32.0 ? 32.0 : mean;
            mean -= chunk;
            const double limit = std::exp(-chunk);
            double prod = next_double();
            std::uint64_t count = 0;
            while (prod > limit) {
                ++count;
                prod *= next_double();
            }
            total += count;
        }
        return total;
    }

private:
    std::uint64_t state_;
};

}  // namespace perfhom
