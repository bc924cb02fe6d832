#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace rootlab {

/**
 * Counter-based random stream.
 *
 * A stream is identified by a 64-bit key; draw number i (i = 0, 1, ...)
 * is a pure function of (key, i):
 *
 *     draw(i) = mix64(key + (i + 1) * 0x9E3779B97F4A7C15)
 *
 * where mix64 is the SplitMix64 finalizer
 *
 *     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
 *     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
 *     z =  z ^ (z >> 31)
 *
 * Keys are derived from (master_seed, replica_index, stage_tag) by
 *
 *     k0  = mix64(master_seed + 0x9E3779B97F4A7C15)
 *     k1  = mix64(k0 ^ (replica_index * 0xD1B54A32D192ED03 + 0x9E3779B97F4A7C15))
 *     key = mix64(k1 ^ fnv1a64(stage_tag))
 *
 * with fnv1a64 the 64-bit FNV-1a hash of the tag bytes (offset basis
 * 0xCBF29CE484222325, prime 0x100000001B3). All arithmetic is modulo 2^64.
 *
 * Derived variates:
 *   - uniform():  (draw >> 11) * 2^-53, in [0, 1)
 *   - normal():   Box-Muller on two uniforms u1, u2 with u1 replaced by
 *                 1 - u1 so the logarithm argument lies in (0, 1]:
 *                 sqrt(-2 log(1 - u1)) * cos(2 pi u2); the sine branch is
 *                 discarded, so every normal consumes exactly two draws.
 *   - gamma(a):   Marsaglia-Tsang squeeze for a >= 1; for a < 1,
 *                 gamma(a + 1) * u^(1/a).
 */
class RngStream {
public:
    using result_type = std::uint64_t;

    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    explicit RngStream(std::uint64_t key) noexcept : key_(key) {}

    static constexpr std::uint64_t mix64(std::uint64_t z) noexcept
    {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static constexpr std::uint64_t fnv1a64(std::string_view tag) noexcept
    {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (unsigned char c : tag) {
            h ^= c;
            h *= 0x100000001B3ULL;
        }
        return h;
    }

    static constexpr std::uint64_t derive_key(std::uint64_t master_seed, std::uint64_t replica,
                                              std::string_view stage) noexcept
    {
        const std::uint64_t k0 = mix64(master_seed + kGolden);
        const std::uint64_t k1 = mix64(k0 ^ (replica * 0xD1B54A32D192ED03ULL + kGolden));
        return mix64(k1 ^ fnv1a64(stage));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

    /// Draw at an arbitrary position without advancing the stream.
    std::uint64_t at(std::uint64_t index) const noexcept { return mix64(key_ + (index + 1) * kGolden); }

    result_type operator()() noexcept { return at(counter_++); }

    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    double normal() noexcept
    {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double gamma(double shape) noexcept
    {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(1.0 - uniform(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = 1.0 - uniform();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Chi-distributed variate with `dof` degrees of freedom.
    double chi(double dof) noexcept { return std::sqrt(2.0 * gamma(0.5 * dof)); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

inline RngStream rng_stream(std::uint64_t master_seed, std::uint64_t replica_index, std::string_view stage_tag)
{
    return RngStream(RngStream::derive_key(master_seed, replica_index, stage_tag));
}

} // namespace rootlab
