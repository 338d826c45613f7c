#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace ose {

using Seed = std::uint64_t;

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// 128-bit stream key. Two keys derived from different paths are
/// statistically independent; derivation is order-free with respect to how
/// many other streams exist.
struct StreamKey {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    friend constexpr bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Hash (seed, path...) into a 128-bit key. Each lane absorbs the path with
/// its own multiplier so the two halves are not trivially related.
constexpr StreamKey derive_key(Seed seed, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t a = mix64(seed ^ 0x243F6A8885A308D3ULL);
    std::uint64_t b = mix64(seed + 0x13198A2E03707344ULL);
    std::uint64_t i = 0;
    for (std::uint64_t p : path) {
        ++i;
        a = mix64(a ^ mix64(p + i * kGolden));
        b = mix64(b + mix64(p ^ (i * 0xA4093822299F31D0ULL)));
    }
    return {a, b};
}

/// Collapse a derived key back into a 64-bit seed (for nesting derivations).
constexpr Seed derive_seed(Seed seed, std::initializer_list<std::uint64_t> path) noexcept {
    const StreamKey k = derive_key(seed, path);
    return mix64(k.hi ^ mix64(k.lo));
}

/// Counter-based generator: output i is a pure function of (key, i), so any
/// stream can be reproduced or split without replaying others.
class CounterRng {
public:
    explicit constexpr CounterRng(StreamKey key) noexcept : key_(key) {}
    explicit constexpr CounterRng(Seed seed) noexcept : key_(derive_key(seed, {})) {}

    constexpr std::uint64_t operator()() noexcept {
        ++counter_;
        const std::uint64_t z = mix64(key_.lo + counter_ * kGolden);
        return mix64(z ^ key_.hi);
    }

    /// Uniform integer in [0, bound), bound >= 1, without modulo bias.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept {
        // Lemire's multiply-shift with rejection.
        std::uint64_t x = (*this)();
        __uint128_t prod = static_cast<__uint128_t>(x) * bound;
        std::uint64_t low = static_cast<std::uint64_t>(prod);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                x = (*this)();
                prod = static_cast<__uint128_t>(x) * bound;
                low = static_cast<std::uint64_t>(prod);
            }
        }
        return static_cast<std::uint64_t>(prod >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Rademacher variable.
    constexpr int sign() noexcept { return ((*this)() >> 63) ? -1 : 1; }

    /// Standard normal via Box-Muller; one pair of uniforms per draw so the
    /// stream position does not depend on call history parity.
    double normal() noexcept {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    constexpr std::uint64_t position() const noexcept { return counter_; }
    constexpr const StreamKey& key() const noexcept { return key_; }

private:
    StreamKey key_;
    std::uint64_t counter_ = 0;
};

}  // namespace ose
