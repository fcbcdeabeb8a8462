#pragma once

#include <cstdint>
#include <random>

namespace seal {

// 64-bit finalizer used to whiten seeds and derive independent streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for the i-th logical substream of a base seed (per-episode
// environments, parallel evaluation workers, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base ^ splitmix64(index + 0x51ed270b4d6ec0ffULL));
}

// Seeded generator; every random draw in the toolkit flows through this
// class so a run is reproducible bit for bit from its seed. Uniform doubles
// and bounded ints are produced from raw bits rather than from
// std::uniform_*_distribution, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in {0, ..., n-1}. Requires n > 0.
    int uniform_int(int n) {
        const auto wide = static_cast<unsigned __int128>(next_u64()) *
                          static_cast<unsigned __int128>(static_cast<std::uint64_t>(n));
        return static_cast<int>(static_cast<std::uint64_t>(wide >> 64));
    }

    // Independent child generator for a tagged substream.
    Rng stream(std::uint64_t tag) const { return Rng(derive_seed(seed_, tag)); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace seal
