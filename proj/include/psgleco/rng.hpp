#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace psgleco {

// Deterministic random stream. The engine is std::mt19937_64, whose output
// sequence is pinned by the standard, so identical seeds give identical
// draws on every platform. The derived draws (bounded integers, uniforms,
// normals) are implemented here instead of with std::*_distribution, whose
// algorithms are implementation-defined.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, bound) via the multiply-high reduction. No modulo
    // bias beyond bound/2^64, and no rejection loop, so exactly one engine
    // draw is consumed per call.
    std::uint64_t uniform_index(std::uint64_t bound) {
        const unsigned __int128 wide =
            static_cast<unsigned __int128>(next_u64()) * bound;
        return static_cast<std::uint64_t>(wide >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 == 0.0) u1 = uniform();  // log(0) guard
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace psgleco
