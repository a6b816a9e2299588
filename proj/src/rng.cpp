#include "mcvd/rng.hpp"

#include "mcvd/errors.hpp"

namespace mcvd {

int Rng::uniform_int(int n) {
    if (n <= 0) {
        throw UsageError("uniform_int requires n > 0");
    }
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    // Largest multiple of `bound` that fits in 64 bits; draws at or above it
    // are rejected so every residue is equally likely.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<int>(x % bound);
}

namespace {

// splitmix64 finalizer: scrambles a 64-bit value into a well-mixed output.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    // FNV-1a over the tag bytes, then fold in the seed and finalize.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(h ^ mix64(seed));
}

} // namespace mcvd
