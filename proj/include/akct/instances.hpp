#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "akct/dist.hpp"
#include "akct/rational.hpp"
#include "akct/rng.hpp"

namespace akct {

struct Provenance {
    std::string construction;
    int k = 0;
    double eps = 0.0;
    std::uint64_t seed = 0;
    std::string note;
};

// A (p, q) pair with ground truth: either identical objects, or certified
// A_{k_certified}-far with the exact distance.  Far values are re-verified
// against the metrics oracle at generation time.
struct InstancePair {
    PiecewiseConstantDensity p = uniform_density();
    PiecewiseConstantDensity q = uniform_density();
    bool identical = false;
    int k_certified = 0;
    double ak_value = 0.0;
    Provenance provenance;
};

// k consecutive buckets; each is a three-segment mini-bucket (p carries
// eps/(2k) on the flanks, q carries eps/k in the middle) followed by a
// shared uniform segment of mass (1-eps)/k.  The pair is A_{2k+1}-far with
// distance exactly 2*eps.
InstancePair regime_a_pair(int k, double eps);

// k macro-buckets of mass 1/k.  Each holds a shared prefix of mass x (x
// uniform in [0, (1-eps)/k], drawn per bucket), a mini-bucket of mass
// eps/k, and a shared suffix.  With x_is_null the mini-bucket carries p = q
// and the returned objects are bit-identical; otherwise it is the
// three-segment q/p/q structure and the pair is A_{2k+1}-far.
InstancePair regime_b_pair(int k, double eps, bool x_is_null, RngStream& rng);

// Exact label-sequence distribution for r ordered draws from the mixture
// restricted to a mini-bucket: `structured` is the far construction (labels
// determined by segment, segment masses 1/4, 1/2, 1/4), `null` the p = q
// case (labels i.i.d. fair).  Sequences are indexed by bitmask; bit i set
// means the i-th smallest draw came from Q.  All arithmetic is exact.
struct OrderDistribution {
    int r;
    std::vector<Rational> structured;
    std::vector<Rational> null;
    Rational tv;
};
OrderDistribution minibucket_order_distribution(int r);

// Random density with at most t pieces: shared random breakpoint grid,
// Dirichlet(1,..,1) piece masses.
PiecewiseConstantDensity random_flat_density(int t, RngStream& rng);

// Two random t-piece densities on a shared grid, rejection-resampled until
// their A_{2t} distance reaches eps; gives up after 10^4 attempts.
InstancePair gen_flat_pair(int t, double eps, RngStream& rng);

enum class Family {
    TFlat,
    TPiecewiseDegree,
    LogConcave,
    LogConcaveMixture,
    TModal,
    Mhr,
};

struct ClassSpec {
    Family family;
    int t = 0;           // pieces (TFlat, TPiecewiseDegree) or modes (TModal)
    int degree = 0;      // TPiecewiseDegree
    int kmix = 0;        // LogConcaveMixture
    std::int64_t n = 0;  // discrete support (TModal, Mhr)
};

// The partition count k at which the A_k distance is a faithful proxy for
// L1 within eps/2 for the family, i.e. what to hand the general tester.
int class_k(const ClassSpec& spec, double eps);

} // namespace akct
