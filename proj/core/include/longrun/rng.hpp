#pragma once

#include <cstdint>
#include <limits>

namespace longrun {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator so
/// the <random> distributions can draw from it.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
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

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

/// Per-path streams: the engine for (seed, path) depends on nothing else, so
/// a path is reproduced exactly whatever thread happens to run it.
struct RngPolicy {
    std::uint64_t seed = 20240601;

    std::uint64_t stream_seed(std::uint64_t path) const {
        std::uint64_t st = seed;
        const std::uint64_t h = splitmix64(st);
        st = h ^ (path * 0xd1b54a32d192ed03ULL);
        return splitmix64(st);
    }
    Xoshiro256 engine(std::uint64_t path) const { return Xoshiro256(stream_seed(path)); }
};

}  // namespace longrun
