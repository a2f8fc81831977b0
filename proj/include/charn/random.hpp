#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace charn {

/// SplitMix64 finalizer; used to expand seeds and derive stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derive the seed of an independent child stream from (seed, stream index).
/// Every Monte Carlo replicate and bootstrap replicate gets its own stream,
/// so results do not depend on execution order or thread count.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed + 0x9E3779B97F4A7C15ull * (stream + 1));
}

/**
 * Small deterministic PRNG (xoshiro256++) with explicit normal and index
 * helpers. Standard-library distributions are avoided on purpose: their
 * output is implementation-defined, and the reproducibility contract here
 * is that a seed fully determines every draw.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9E3779B97F4A7C15ull;
            word = mix64(sm);
        }
    }

    static Rng from_stream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(derive_stream(seed, stream));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double next_unit_positive() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller, spare value cached.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit_positive();
        const double u2 = next_unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Unbiased uniform index in [0, bound); bound must be positive.
    std::size_t next_index(std::size_t bound) {
        const std::uint64_t b = bound;
        const std::uint64_t limit = (~std::uint64_t{0} / b) * b;
        std::uint64_t u;
        do {
            u = next_u64();
        } while (u >= limit);
        return static_cast<std::size_t>(u % b);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace charn
