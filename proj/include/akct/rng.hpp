#pragma once

#include <cstdint>
#include <random>

namespace akct {

// Deterministic random stream addressed by (master seed, stream index).
//
// The same (seed, index) pair reproduces the same draw sequence byte for
// byte on every platform: the engine is std::mt19937_64 (bit-exact per the
// standard) and all distribution transforms are implemented here rather
// than with <random>'s distributions, whose output is implementation
// defined.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t index = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t index() const { return index_; }

    std::uint64_t next_u64();

    // Uniform double in [0, 1), 53 random bits.
    double uniform();

    // Uniform integer in [0, bound); bound must be positive.
    std::uint64_t uniform_below(std::uint64_t bound);

    // Exp(1) variate.
    double exponential();

    // Poisson variate with the given nonnegative mean.  Inversion for small
    // means, an Exp(1) interarrival count otherwise; both exact.
    std::int64_t poisson(double mean);

    // Independent stream derived from this stream's address and a salt.
    // Forking does not advance this stream.
    RngStream substream(std::uint64_t salt) const;

private:
    std::uint64_t seed_;
    std::uint64_t index_;
    std::mt19937_64 engine_;
};

// Free-function form used throughout the samplers.
std::int64_t poisson_count(double mean, RngStream& rng);

} // namespace akct
