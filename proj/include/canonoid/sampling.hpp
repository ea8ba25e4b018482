#pragma once

// Deterministic sampling.  The generator is xoshiro256** (Blackman & Vigna)
// seeded through splitmix64, so a seed gives the same stream on every
// platform.  Doubles use the top 53 bits: u = (x >> 11) * 2^-53.

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace canonoid {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    std::uint64_t next() {
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

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_{};
};

/// `count` points uniformly in the box, one [lo, hi] per coordinate.
inline std::vector<std::vector<double>> sample_box(const std::vector<std::pair<double, double>>& box,
                                                   std::size_t count, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    std::vector<std::vector<double>> out(count, std::vector<double>(box.size()));
    for (auto& pt : out)
        for (std::size_t i = 0; i < box.size(); ++i) pt[i] = rng.uniform(box[i].first, box[i].second);
    return out;
}

}  // namespace canonoid
