#pragma once

#include <cstdint>
#include <vector>

#include "akct/dist.hpp"

namespace akct {

// Ascending cut points over [0, 1] (continuous domains) or over bin
// boundaries 0..n stored as integral doubles (discrete domains).  Repeated
// cuts are rejected; a partition with c cuts has c-1 intervals.
struct IntervalPartition {
    std::vector<double> cuts;

    static IntervalPartition make(std::vector<double> cuts);
    std::size_t interval_count() const { return cuts.size() - 1; }
};

IntervalPartition uniform_bin_partition(std::size_t n); // cuts 0,1,..,n

// Prefix sums of p - q: s[0] = 0, s[j] = sum_{i<j}(p_i - q_i); s[n] is 0 up
// to rounding when both inputs are normalized.
struct PrefixSumTable {
    std::vector<double> s;
    static PrefixSumTable of_difference(const DiscretePmf& p, const DiscretePmf& q);
};

// Mass of d on each interval of the partition.
DiscretePmf reduced_pmf(const PiecewiseConstantDensity& d, const IntervalPartition& part);
DiscretePmf reduced_pmf(const DiscretePmf& d, const IntervalPartition& part);

// Max over partitions into at most k intervals of sum_i |p(I_i) - q(I_i)|,
// by dynamic programming over prefix sums in O(nk).
double ak_distance_discrete(const DiscretePmf& p, const DiscretePmf& q, int k);

struct AkDiscreteResult {
    double value;
    std::vector<std::size_t> cuts; // interior cut positions, ascending
};
AkDiscreteResult ak_distance_discrete_with_cuts(const DiscretePmf& p, const DiscretePmf& q,
                                                int k);

// Exhaustive-enumeration oracle for the same maximum; n <= 16.  Kept
// permanently as the independent test oracle for the DP.
double ak_distance_bruteforce(const DiscretePmf& p, const DiscretePmf& q, int k);
AkDiscreteResult ak_distance_bruteforce_with_cuts(const DiscretePmf& p, const DiscretePmf& q,
                                                  int k);

// A_k between piecewise-constant densities, exactly, by reduction to the
// discrete DP over maximal constant-sign runs of p - q.
double ak_distance_pwc(const PiecewiseConstantDensity& p, const PiecewiseConstantDensity& q,
                       int k);

struct AkPwcResult {
    double value;
    std::vector<double> cut_points; // interior cut x positions
};
AkPwcResult ak_distance_pwc_with_cuts(const PiecewiseConstantDensity& p,
                                      const PiecewiseConstantDensity& q, int k);

// Sign-run reduction used by ak_distance_pwc, exposed for the oracle
// equivalence tests: collapses the merged grid into maximal runs on which
// p - q does not change sign and returns the per-run masses.
struct SignRunReduction {
    std::vector<double> p_masses;
    std::vector<double> q_masses;
    std::vector<double> boundaries; // run boundaries incl. 0 and 1
};
SignRunReduction sign_run_reduction(const PiecewiseConstantDensity& p,
                                    const PiecewiseConstantDensity& q);

double l1_distance(const DiscretePmf& p, const DiscretePmf& q);
double l2_distance(const DiscretePmf& p, const DiscretePmf& q);
double l1_distance(const PiecewiseConstantDensity& p, const PiecewiseConstantDensity& q);
double l2_distance(const PiecewiseConstantDensity& p, const PiecewiseConstantDensity& q);

// Max over partitions into intervals of width at most 1/k of
// sum_i discr^2(I_i) / width^{1/8}(I_i), with discr(I) = |p(I) - q(I)| and
// width(I) = (bins in I)/n.  Brute force, n <= 16; exists to validate the
// multi-scale analysis inequalities on small instances.
double scale_sensitive_l2(const DiscretePmf& p, const DiscretePmf& q, int k);

// sum over nested dyadic levels j = 0..j0-1 (level j has k*2^j intervals)
// of sum_i discr^2(I_i^{(j)}) / width^{1/8}(I_i^{(j)}).  Requires the
// support size to be k * 2^{j0}.  Companion upper-bound side for the
// scale-sensitive distance checks.
double dyadic_level_discrepancy_sum(const DiscretePmf& p, const DiscretePmf& q, int k);

} // namespace akct
