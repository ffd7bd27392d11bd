#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace livegen {

/// SplitMix64 step; used to expand a 64-bit seed into xoshiro state.
inline std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna). All derived draws (ranges, coins,
/// weighted choices) are implemented here rather than through <random>
/// distributions, whose output is implementation-defined, so a seed means
/// the same program on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed)
    {
        std::uint64_t sm = seed;
        for (auto& w : s_)
            w = splitmix64(sm);
    }

    std::uint64_t next()
    {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n)
    {
        if (n == 0)
            throw std::invalid_argument("Rng::below(0)");
        // Rejection sampling on the top of the range removes modulo bias.
        const std::uint64_t limit = -n % n;
        for (;;) {
            std::uint64_t r = next();
            if (r >= limit)
                return r % n;
        }
    }

    /// Uniform in [lo, hi], inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi)
    {
        std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
        if (span == UINT64_MAX)
            return static_cast<std::int64_t>(next());
        return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + below(span + 1));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return unit() < p; }

    /// Index drawn with probability proportional to weights[i]. Returns
    /// weights.size() when every weight is zero.
    std::size_t weighted(std::span<const unsigned> weights)
    {
        std::uint64_t total = 0;
        for (unsigned w : weights)
            total += w;
        if (total == 0)
            return weights.size();
        std::uint64_t r = below(total);
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (r < weights[i])
                return i;
            r -= weights[i];
        }
        return weights.size() - 1;
    }

    template <class Container>
    auto& pick(Container& c)
    {
        return c[below(c.size())];
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

} // namespace livegen
