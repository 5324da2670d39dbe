#pragma once
#include <cmath>
#include <cstdint>
#include <string_view>

#include "types.hpp"

namespace qrplsim {

// All randomness in a run flows through named substreams derived from the
// config seed, so any single stream can be reproduced in isolation.
// Generator is xoshiro256++ seeded via splitmix64; distributions are
// implemented here rather than taken from <random> so that draws are
// bit-identical across standard libraries.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_name(std::string_view name) {
    // FNV-1a
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : name) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

class RngStream {
public:
    RngStream() : RngStream(0) {}

    explicit RngStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
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

    // uniform in [0, 1)
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [lo, hi] inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    // exponential with the given mean (inverse-CDF)
    double exponential(double mean) { return -mean * std::log1p(-u01()); }

    // standard normal via Box-Muller, one value per call pair
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = u01();
        double u2 = u01();
        while (u1 <= 0.0) u1 = u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    bool bernoulli(double p) { return u01() < p; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Substream derivation: seed xor hash(run_index, substream_name [, node]).
inline RngStream make_substream(std::uint64_t seed, std::uint32_t run_index,
                                std::string_view name, node_id node = kNoNode) {
    std::uint64_t mix = hash_name(name);
    mix ^= 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(run_index) + 1);
    mix ^= 0xC2B2AE3D27D4EB4FULL * (static_cast<std::uint64_t>(node) + 1);
    std::uint64_t derived = seed ^ mix;
    return RngStream(splitmix64(derived));
}

} // namespace qrplsim
