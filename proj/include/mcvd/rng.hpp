#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mcvd {

// Deterministic random source. All stochastic components draw from an Rng
// seeded through derive_seed so that independent streams (weight init,
// exploration, replay sampling, evaluation) never interleave and results
// are reproducible bit-for-bit for a given top-level seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer in [0, n). Rejection sampling keeps the distribution
    // exactly uniform regardless of n.
    int uniform_int(int n);

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

// Stable stream split: the same (seed, tag) pair always yields the same
// child seed, and distinct tags yield well-separated streams.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

} // namespace mcvd
