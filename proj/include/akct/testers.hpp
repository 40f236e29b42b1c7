#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "akct/dist.hpp"
#include "akct/metrics.hpp"

namespace akct {

enum class Decision : std::uint8_t { Yes, No };

const char* to_string(Decision d);

// Ordered (key, value) trace of every statistic computed along the way;
// keys are unique and insertion order is deterministic, so a serialized
// trace is reproducible byte for byte from the seed.
using Trace = std::vector<std::pair<std::string, double>>;

void trace_put(Trace& t, std::string key, double value);
double trace_get(const Trace& t, const std::string& key); // throws if absent

struct Verdict {
    Decision decision;
    Trace trace;
    bool rejected() const { return decision == Decision::No; }
};

// All tunable constants in one place.  The statistical analysis fixes only
// the shape of each quantity ("a sufficiently large constant times ...");
// the shipped values are set by the harness's null-simulation calibration
// so that the empirical type-I error stays within budget at reference
// sizes, and the classical literal thresholds remain available through
// classical_simple()/classical_general() for comparison runs.
struct TesterConfig {
    int k = 2;
    double epsilon = 0.5;

    // Budget of the order-statistic stage: m = sample_mult * k^{4/5} / eps^{6/5}.
    double sample_mult = 6.0;
    // Explicit override for m; 0 means "use the formula".  Used by budget sweeps.
    double m_override = 0.0;
    // Reject when Z > z_mult * sqrt(m).
    double z_mult = 3.0;

    // Refinement stage of the general tester.
    int repetitions = 10;          // binning iterations
    double inner_eps_div = 2.0;    // reduced-tester target distance = eps / this
    double inner_delta = 1.0 / 9.0;// per-iteration error budget handed to the reduced tester

    // Multi-scale schedule.
    int j0_offset = 2;             // j0 = ceil(log2(1/eps)) + j0_offset
    double schedule_eps_mult = 1.0;// eps_j = schedule_eps_mult * eps * 2^{3j/8}

    // Collision-statistic tester.
    double l2_budget_mult = 40.0;  // per-side sample budget = this * sqrt(k) / eps^2
    double l2_threshold_frac = 0.5;// threshold = this * (expected statistic at distance eps)

    double m() const;              // resolved Poissonized budget

    static TesterConfig classical_simple(int k, double eps);
    static TesterConfig classical_general(int k, double eps);
    static TesterConfig calibrated_simple(int k, double eps);
    static TesterConfig calibrated_general(int k, double eps);
};

// Number of adjacent same-label pairs minus adjacent different-label pairs
// over a value-sorted labeled sample; 0 for fewer than 2 samples.  Values
// must be nondecreasing.
std::int64_t z_statistic(std::span<const LabeledSample> sorted_samples);

// Poi(m) labeled samples from each of p and q, merged and sorted with ties
// broken at random.  Appends draw counts to the trace under the prefix.
std::vector<LabeledSample> draw_merged_poissonized(const PiecewiseConstantDensity& p,
                                                   const PiecewiseConstantDensity& q,
                                                   double m, RngStream& rng, Trace& trace,
                                                   const std::string& prefix);

// Order-statistic tester: YES unless Z > z_mult * sqrt(m).  Designed for
// eps of order at least k^{-1/6}; below that regime the verdict trace
// carries regime_warning = 1 and power degrades gracefully.
Verdict simple_ak_tester(const PiecewiseConstantDensity& p,
                         const PiecewiseConstantDensity& q, const TesterConfig& cfg,
                         RngStream& rng);

// Collision-statistic L2 closeness tester on Poissonized bin counts.
// Splits the counts into an odd number of groups (grown logarithmically in
// 1/delta), computes T = sum_i ((X_i - Y_i)^2 - X_i - Y_i) per group, votes
// NO when T exceeds threshold_frac times the statistic's expectation at L2
// distance eps/sqrt(n), and takes the majority.  Callers guarantee the
// near-uniformity m-vs-n budget; insufficient counts degrade power, never
// the YES case.
Verdict l2_closeness_tester(std::span<const std::int64_t> x_counts,
                            std::span<const std::int64_t> y_counts, std::int64_t n,
                            double eps, double delta, RngStream& rng,
                            double threshold_frac = 0.5);

// Majority-vote repetition count for a target error probability.
int majority_reps(double delta);

struct ScheduleLevel {
    int j;
    std::int64_t ell;      // intervals at this level
    double eps_j;
    double delta_j;
    int groups;            // majority groups the collision tester will use
    double sample_budget;  // per-side samples this level needs on its own
    bool sample_free;      // eps_j > 1: the level cannot fire and draws nothing
    IntervalPartition partition; // cuts over bins 0..n
};

struct MultiScaleSchedule {
    int j0;
    std::int64_t n;        // padded support, k * 2^{j0}
    std::vector<ScheduleLevel> levels; // j = 0 .. j0-1, coarse to fine
};

// Nested dyadic partitions with ell_j = k * 2^j, eps_j = c * eps * 2^{3j/8},
// delta_j = 2^{-j}/6.  Support is padded to k * 2^{j0} with
// j0 = ceil(log2(1/eps)) + j0_offset, growing further if needed to cover
// min_support bins.
MultiScaleSchedule multiscale_schedule(int k, double eps, const TesterConfig& cfg,
                                       std::int64_t min_support = 0);

// Multi-scale tester for near-uniform discrete distributions: one shared
// Poissonized sample set per side feeds every level's reduced collision
// test; NO as soon as any level fires; the whole pass is repeated
// majority_reps(delta) times.
Verdict flat_ak_tester(const DiscretePmf& p, const DiscretePmf& q, int k, double eps,
                       double delta, RngStream& rng, const TesterConfig& cfg);

// cuts = {0} u sorted(samples) u {1}; r samples yield r + 1 intervals.
IntervalPartition random_binning(std::span<const double> mix_samples);

// Two-stage tester: the order-statistic stage at threshold z_mult*sqrt(m),
// then `repetitions` rounds of random binning by Poi(m) mixture draws
// followed by the flat tester on the reduced pair with parameters
// (2k+1, eps/inner_eps_div, inner_delta).  Reduced-stage samples are fresh
// Poissonized draws, never recycled from the binning.
Verdict general_ak_tester(const PiecewiseConstantDensity& p,
                          const PiecewiseConstantDensity& q, const TesterConfig& cfg,
                          RngStream& rng);

// Poissonized bin counts with per-bin mean m * p_i, padded with zero bins
// up to pad_to when that exceeds the support.
std::vector<std::int64_t> poisson_counts(const DiscretePmf& p, double m, RngStream& rng,
                                         std::size_t pad_to = 0);

// Expected number of samples a full run draws under this configuration;
// an arithmetic identity used to pin the budget's growth shape.
double expected_total_samples(const TesterConfig& cfg, bool include_refinement_stage);

} // namespace akct
