#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace qrisk {

/// SplitMix64 step; used both for seeding and for hashing small tuples.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Order-sensitive 64-bit mix of an arbitrary list of words. Deterministic
/// across platforms; used to derive per-call seeds from (master seed,
/// fingerprint, purpose tag).
inline uint64_t hash_mix(std::initializer_list<uint64_t> words) {
    uint64_t state = 0x243f6a8885a308d3ull;
    for (uint64_t w : words) {
        state ^= w + 0x9e3779b97f4a7c15ull + (state << 6) + (state >> 2);
        splitmix64(state);
    }
    uint64_t s = state;
    return splitmix64(s);
}

inline uint64_t hash_str(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// xoshiro256++ with splitmix64 seeding. Self-contained so sampled streams
/// are bit-identical across standard libraries and platforms.
class Rng {
  public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) {
        // Multiply-shift bounded draw; bias is < 2^-64 * n, irrelevant here.
        return uint64_t((__uint128_t(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller (no std::normal_distribution so the
    /// stream stays portable).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// exp(sigma * N(0,1)): multiplicative jitter with median 1.
    double lognormal_jitter(double sigma) { return std::exp(sigma * gaussian()); }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace qrisk
