#pragma once

#include "fairdgcl/common.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace fairdgcl {

/// Deterministic random stream with portable draw functions.
///
/// std::uniform_real_distribution and friends are implementation-defined, so
/// uniform/normal are generated directly from mt19937_64 bits. Every draw is
/// reproducible from (seed) alone on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1): 53 random bits scaled.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform strictly inside (lo, hi); rejects the lo endpoint.
    double uniform_open(double lo, double hi) {
        double u = uniform();
        while (u == 0.0) u = uniform();
        return lo + u * (hi - lo);
    }

    /// Standard normal via Box-Muller (stateless: no cached spare).
    double normal() {
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Uniform integer in [0, n) without modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// Derives the seed of an independent named stream. All stochastic choices in
/// a run flow through streams keyed by (run seed, purpose tag, epoch), which
/// makes resumed runs bit-identical to uninterrupted ones.
inline std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag, std::uint64_t epoch = 0) {
    std::uint64_t h = fnv1a64(tag, seed ^ 0x9e3779b97f4a7c15ull);
    h ^= epoch + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    // splitmix64 finalizer
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

inline Rng derive_rng(std::uint64_t seed, const std::string& tag, std::uint64_t epoch = 0) {
    return Rng(derive_seed(seed, tag, epoch));
}

}  // namespace fairdgcl
