#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

// Small deterministic RNG used for simulation noise and ePIE frame ordering.
// splitmix64 is used instead of std:: engines/distributions because the
// standard distributions are implementation-defined; this keeps outputs
// bitwise stable across compilers.

namespace ptyroi {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound).
    std::uint64_t bounded(std::uint64_t bound) { return next() % bound; }

private:
    std::uint64_t state_;
};

/// Derives an independent stream for substream k of a root seed.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t k) {
    SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ULL * (k + 1)));
    return SplitMix64(mixer.next());
}

/// Deterministic Poisson draw: Knuth's product method for small means, a
/// rounded normal approximation (Box-Muller) for large ones.
inline std::uint64_t poisson(SplitMix64& rng, double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double prod = 1.0;
        do {
            ++k;
            prod *= rng.uniform();
        } while (prod > limit);
        return k - 1;
    }
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) *
                     std::cos(2.0 * std::numbers::pi * u2);
    const double value = std::round(mean + std::sqrt(mean) * z);
    return value <= 0.0 ? 0 : static_cast<std::uint64_t>(value);
}

}  // namespace ptyroi
