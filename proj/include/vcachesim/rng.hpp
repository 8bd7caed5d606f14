#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "vcachesim/types.hpp"

namespace vcsim {

// All randomness flows through this wrapper around std::mt19937_64. The
// engine is fully specified by the standard, and the uniform/exponential
// draws below avoid std::*_distribution (whose algorithms are
// implementation-defined), so a (seed, draw sequence) pair reproduces
// bit-identically on any conforming platform.
class Rng {
public:
    Rng() : engine_(0) {}
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t nextU64() { return engine_(); }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). n must be > 0. Uses rejection sampling so the
    // result is exactly uniform and reproducible.
    std::uint64_t uniformInt(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Exponential inter-arrival draw, rate in events per unit time.
    double exponential(double rate) {
        // uniform() < 1 always, so the log argument stays positive
        return -std::log(1.0 - uniform()) / rate;
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

// Derives an independent child seed for a named stream, so per-tenant
// workload draws do not depend on event interleaving elsewhere.
inline std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t streamTag) {
    return mix64(mix64(master) ^ streamTag);
}

}  // namespace vcsim
