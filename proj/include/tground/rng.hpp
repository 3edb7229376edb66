// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace tg {

// Self-contained splitmix64 generator. std::normal_distribution and friends
// are implementation-defined, so every draw here is spelled out explicitly;
// a given seed produces the same stream on any platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be > 0; modulo bias is irrelevant at
    // the corpus sizes used here.
    uint64_t below(uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller (one value per call, no caching, so
    // interleaved draws stay reproducible).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Independent child stream; mixing the id through one splitmix step keeps
    // nearby ids decorrelated.
    Rng fork(uint64_t stream_id) const {
        Rng child(state_ ^ (0x9e3779b97f4a7c15ULL * (stream_id + 0x632be59bd9b4e019ULL)));
        child.next_u64();
        return child;
    }

private:
    uint64_t state_;
};

// FNV-1a, used to derive per-token embedding seeds. Stable across platforms,
// unlike std::hash.
inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace tg
