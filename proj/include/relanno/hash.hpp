#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace relanno {

/// SplitMix64 (Steele, Lea, Flood). Portable, fully specified 64-bit generator used
/// for every seeded draw in the toolkit: option shuffles, mock responses, synthetic data.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound) by rejection, no modulo bias.
    std::uint64_t below(std::uint64_t bound)
    {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold)
                return r % bound;
        }
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// SplitMix64 finalizer applied to a single value.
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a over the bytes of `s`.
std::uint64_t fnv1a64(std::string_view s);

/// Order-dependent combination of two 64-bit keys.
inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) { return mix64(a ^ mix64(b + 0x632BE59BD9B4E019ULL)); }

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

} // namespace relanno
