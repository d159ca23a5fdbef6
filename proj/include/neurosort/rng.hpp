#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "neurosort/common.hpp"

namespace neurosort {

// Seedable random stream. All stochastic draws in the library go through this
// class so that a run replays bit-identically from its seed. Distribution
// mapping is hand-rolled (not std::*_distribution) to pin the exact sequence
// independent of the standard library implementation.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(mix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform index in [0, n). Modulo bias is < 2^-53 for any practical n.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    // Standard normal via Box-Muller. Draws two uniforms per call and keeps
    // no cached second value, so the draw count per call is fixed.
    double gaussian() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

    // Derives an independent stream from the construction seed and a tag.
    // Depends only on (seed, tag), never on how much this stream was consumed.
    RngStream split(std::uint64_t tag) const { return RngStream(mix64(seed_ ^ mix64(tag ^ 0xa5a5a5a5a5a5a5a5ull))); }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace neurosort
