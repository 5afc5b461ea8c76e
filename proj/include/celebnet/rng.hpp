#ifndef CELEBNET_RNG_HPP
#define CELEBNET_RNG_HPP

#include <cstdint>
#include <random>

namespace celebnet {

// SplitMix64 finalizer. Used both as a seed scrambler and as the mixing
// function of the stream-derivation scheme below.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based stream split: stream `index` of root seed `root` is seeded
// with mix64(root ^ mix64(index)). Every parallel unit of work (trial,
// relabeling sample, candidate order) draws from its own derived stream, so
// results do not depend on worker scheduling. Nested splits compose:
// derive_seed(derive_seed(root, i), j).
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    return mix64(root ^ mix64(index));
}

// Deterministic RNG wrapper. All randomness in the library flows through
// this class; the bounded-int and unit draws are implemented here (not via
// std::uniform_*_distribution) so sequences are identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(mix64(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53 random bits.
    double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform in [0, bound), bound >= 1. Unbiased via rejection on the
    // top-down mask.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t mask = ~std::uint64_t{0} >> __builtin_clzll((bound - 1) | 1);
        for (;;) {
            std::uint64_t v = gen_() & mask;
            if (v < bound) return v;
        }
    }

    bool bernoulli(double p) { return next_unit() < p; }

private:
    std::mt19937_64 gen_;
};

}  // namespace celebnet

#endif
