#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace nfp {

// splitmix64, used to expand a user seed into engine state and to derive
// independent substreams (one per purpose: init, shuffle, probes, sampling).
inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** by Blackman & Vigna. Chosen over std engines so that streams
// are bit-identical across platforms and the 4-word state can be embedded in
// checkpoints directly.
class Rng {
public:
    Rng() : Rng(0) {}

    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    // Independent substream: same seed + different tag -> unrelated stream.
    static Rng substream(std::uint64_t seed, std::uint64_t tag) {
        std::uint64_t sm = seed ^ (0xa5a5a5a5a5a5a5a5ULL * (tag + 1));
        Rng r;
        for (auto& w : r.s_) w = splitmix64(sm);
        return r;
    }

    std::uint64_t next_u64() {
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

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // +1 or -1 with equal probability.
    double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

    // Box-Muller; consumes two words per draw, no cached spare so the state
    // alone fully determines the stream (matters for checkpoint resume).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        // u1 == 0 would give log(0); nudge to the smallest representable draw.
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform integer in [0, n), n >= 1. Rejection-free (modulo bias is
    // negligible at 64 bits for the n used here), deterministic.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    std::array<std::uint64_t, 4> state() const { return s_; }
    void set_state(const std::array<std::uint64_t, 4>& s) { s_ = s; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

}  // namespace nfp
