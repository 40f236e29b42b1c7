#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "akct/instances.hpp"
#include "akct/io.hpp"
#include "akct/testers.hpp"

namespace akct {

enum class TesterKind { Simple, Flat, General };

const char* to_string(TesterKind k);
TesterKind tester_kind_from_string(const std::string& s);

// What one trial feeds its tester: densities for the order-statistic
// testers, pmfs for the flat tester.  shared_ptr lets fixed instances be
// hoisted out of the trial loop.
struct TrialInputs {
    std::shared_ptr<const PiecewiseConstantDensity> p_density;
    std::shared_ptr<const PiecewiseConstantDensity> q_density;
    std::shared_ptr<const DiscretePmf> p_pmf;
    std::shared_ptr<const DiscretePmf> q_pmf;
};

using InstanceProvider = std::function<TrialInputs(RngStream&)>;

struct ExperimentConfig {
    TesterKind tester = TesterKind::General;
    std::string source_name;
    InstanceProvider provider;
    int trials = 0;
    std::uint64_t master_seed = 0;
    int parallelism = 1;
    TesterConfig tester_cfg;
    double flat_delta = 1.0 / 3.0; // target error handed to a standalone flat tester
};

struct TrialRecord {
    int index;
    Decision decision;
    Trace trace;
    double samples_drawn;
    double wall_ms; // informational only; never serialized into reports
};

// Executes the trials with per-trial derived streams; the result is a pure
// function of (config, master_seed), independent of parallelism.
std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg);

struct RateSummary {
    int trials = 0;
    int rejections = 0;
    double rate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 1.0;
};

RateSummary wilson_interval(int rejections, int trials); // 95% score interval
RateSummary summarize(const std::vector<TrialRecord>& records);

// Named providers used by the CLI and tests.
InstanceProvider uniform_null_provider();
InstanceProvider fixed_pair_provider(InstancePair pair);
InstanceProvider regime_a_provider(int k, double eps);           // fixed pair
InstanceProvider regime_b_provider(int k, double eps, bool x_is_null); // fresh per trial
InstanceProvider flat_pair_provider(int t, double eps);          // fresh per trial
InstanceProvider identical_flat_provider(int t, std::uint64_t salt); // fixed random d, pair (d, d)
InstanceProvider file_pair_provider(const std::filesystem::path& p_path,
                                    const std::filesystem::path& q_path);

struct CalibrationResult {
    TesterConfig config;
    double target_type1; // per-stage type-I budget the quantiles were set at
    double z_quantile;   // achieved null quantile of Z / sqrt(m)
    double l2_quantile;  // achieved null quantile of the max normalized L2 statistic
    int trials;
};

// Simulates the null (p = q = uniform) at the given size and places the
// stage thresholds at empirical quantiles so each stage's type-I error is
// at most target_type1 (the refinement stage is budgeted as a whole).  The
// collision-statistic threshold never drops below half the alternative
// expectation.
CalibrationResult calibrate_thresholds(TesterKind kind, int k, double eps, int trials,
                                       RngStream& rng, double target_type1 = 0.125,
                                       int parallelism = 1);

struct SweepPoint {
    int k;
    double eps;
    double m;
    int trials;
    int rejections;
    double rate;
    double ci_lo;
    double ci_hi;
    bool null_side; // true for the completeness probes
};

struct SweepResult {
    std::string tester;
    double eps = 0.0;
    std::uint64_t seed = 0;
    int trials_per_probe = 0;
    std::vector<SweepPoint> grid;
    std::vector<std::pair<int, double>> m_star; // per k
    double slope = 0.0;                          // log-log fit of m*(k)
};

// For each k: doubling search then three bisection rounds (geometric
// midpoints) for the smallest budget m with >= 2/3 rejection on the hard
// pair, with the null rejection checked at <= 1/3.  The reported m* is an
// estimate, not an exact threshold.
SweepResult sweep_sample_complexity(const std::vector<int>& k_grid, double eps, int trials,
                                    RngStream& rng, TesterKind kind = TesterKind::Simple,
                                    const TesterConfig* base_cfg = nullptr,
                                    int parallelism = 1);

struct ReportRow {
    std::string tester;
    int k;
    double eps;
    double m;
    int trials;
    double reject_rate;
    double ci_lo;
    double ci_hi;
    std::uint64_t seed;
};

// CSV schema: tester,k,eps,m,trials,reject_rate,ci_lo,ci_hi,seed.
std::string report_csv(const std::vector<ReportRow>& rows);
void emit_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows);

Json report_json(const std::vector<ReportRow>& rows);
Json sweep_to_json(const SweepResult& sweep);
SweepResult sweep_from_json(const Json& j);
std::vector<ReportRow> sweep_rows(const SweepResult& sweep);

Json trials_json(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records);

// Shortest round-trip decimal representation (deterministic formatting).
std::string fmt_double(double v);

} // namespace akct
