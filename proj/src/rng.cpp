#include "akct/rng.hpp"

#include <cassert>
#include <cmath>

#include "akct/errors.hpp"

namespace akct {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t s = a;
    std::uint64_t h = splitmix64(s);
    s ^= b + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= c + 0xc2b2ae3d27d4eb4fULL;
    h ^= splitmix64(s);
    return h;
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t index)
    : seed_(seed), index_(index), engine_(mix(seed, index, 0x616b6374ULL)) {}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_below(std::uint64_t bound) {
    assert(bound > 0);
    if (bound == 1) return 0;
    // Mask rejection keeps the draw count data-independent of the platform.
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    std::uint64_t r;
    do {
        r = next_u64() & mask;
    } while (r >= bound);
    return r;
}

double RngStream::exponential() {
    // uniform() < 1, so the argument of log1p stays in (-1, 0].
    return -std::log1p(-uniform());
}

std::int64_t RngStream::poisson(double mean) {
    if (!(mean >= 0.0)) throw ConfigError("poisson: mean must be nonnegative");
    if (mean == 0.0) return 0;
    if (mean < 30.0) {
        // CDF inversion by sequential search.
        double p = std::exp(-mean);
        double cum = p;
        double u = uniform();
        std::int64_t k = 0;
        std::int64_t cap = static_cast<std::int64_t>(mean + 20.0 * std::sqrt(mean) + 100.0);
        while (u > cum && k < cap) {
            ++k;
            p *= mean / static_cast<double>(k);
            cum += p;
        }
        return k;
    }
    // Count Exp(1) interarrivals within [0, mean].
    std::int64_t k = 0;
    double s = exponential();
    while (s <= mean) {
        ++k;
        s += exponential();
    }
    return k;
}

RngStream RngStream::substream(std::uint64_t salt) const {
    return RngStream(mix(seed_, index_, salt), 0);
}

std::int64_t poisson_count(double mean, RngStream& rng) { return rng.poisson(mean); }

} // namespace akct
