#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace memsnn {

/// 64-bit FNV-1a. Used wherever a hash must be stable across platforms and
/// standard library implementations (stream names, config fingerprints).
constexpr std::uint64_t fnv1a64(std::string_view text,
                                std::uint64_t hash = 0xcbf29ce484222325ULL)
{
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

/// Seeded random stream. Draws are reproducible bit-for-bit across compilers:
/// the engine is std::mt19937_64 and doubles are formed from the top 53 bits
/// rather than through std::uniform_real_distribution.
class Rng {
public:
    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Named sub-stream of a master seed, optionally indexed (per sample,
    /// per sweep cell, ...). Different names give independent streams, so
    /// turning one noise source on or off never shifts another.
    static Rng stream(std::uint64_t master, std::string_view name,
                      std::uint64_t index = 0)
    {
        const std::uint64_t tag = fnv1a64(name);
        std::seed_seq seq{static_cast<std::uint32_t>(master),
                          static_cast<std::uint32_t>(master >> 32),
                          static_cast<std::uint32_t>(tag),
                          static_cast<std::uint32_t>(tag >> 32),
                          static_cast<std::uint32_t>(index),
                          static_cast<std::uint32_t>(index >> 32)};
        Rng rng;
        rng.engine_.seed(seq);
        return rng;
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n)
    {
        // Modulo with rejection keeps the result unbiased and portable.
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
        std::uint64_t x = engine_();
        while (x >= limit)
            x = engine_();
        return x % n;
    }

    /// Fisher-Yates shuffle; std::shuffle's draw pattern is unspecified.
    template <typename It>
    void shuffle(It first, It last)
    {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            const auto j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace memsnn
