#pragma once

#include <cstdint>
#include <random>

namespace emql {

/// Seeded PRNG with explicit stream separation. Sampling helpers are
/// hand-rolled on top of mt19937_64 so that traces reproduce bit-for-bit
/// across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}

    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
        gen_.seed(seq);
    }

    std::uint64_t next() { return gen_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), n >= 1. Unbiased (rejection sampling).
    int uniform_int(int n) {
        const auto un = static_cast<std::uint64_t>(n);
        const std::uint64_t reject_below = (0 - un) % un;  // 2^64 mod n
        std::uint64_t x = next();
        while (x < reject_below) x = next();
        return static_cast<int>(x % un);
    }

private:
    std::mt19937_64 gen_;
};

// Stream tags used by the harness to keep variance sources independent.
inline constexpr std::uint64_t kStreamEnv = 1;
inline constexpr std::uint64_t kStreamExplore = 2;
inline constexpr std::uint64_t kStreamDelay = 3;

}  // namespace emql
