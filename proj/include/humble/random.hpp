#pragma once

// Seedable pseudo-random generation with a fixed, platform-independent
// integer stream (xoshiro256**, seeded through SplitMix64).
//
// Per-task seeds are derived from a master seed with derive_seed(), which
// folds a list of integer tags (replication, round, individual, ...) into
// the master through SplitMix64 finalization. The mapping depends only on
// the tag values, never on thread count or evaluation order.

#include <array>
#include <cstdint>
#include <initializer_list>

namespace humble {

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for a sub-task: deterministic function of (master, tags...).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    /// Uniform on (0, 1).
    double uniform_open();
    /// Standard normal via Box-Muller (no cached second variate).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    bool bernoulli(double p) { return uniform() < p; }
    /// Gamma(shape, 1) by Marsaglia-Tsang.
    double gamma(double shape);
    double beta(double a, double b);

private:
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace humble
