#include "akct/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "akct/metrics.hpp"

namespace akct {

const char* to_string(TesterKind k) {
    switch (k) {
    case TesterKind::Simple: return "simple";
    case TesterKind::Flat: return "flat";
    case TesterKind::General: return "general";
    }
    return "?";
}

TesterKind tester_kind_from_string(const std::string& s) {
    if (s == "simple") return TesterKind::Simple;
    if (s == "flat") return TesterKind::Flat;
    if (s == "general") return TesterKind::General;
    throw ConfigError("unknown tester: " + s);
}

namespace {

constexpr std::uint64_t kGenSalt = 0x67656e;
constexpr std::uint64_t kTestSalt = 0x746573;

TrialRecord run_one(const ExperimentConfig& cfg, int index) {
    RngStream trial_stream(cfg.master_seed, static_cast<std::uint64_t>(index));
    RngStream gen_rng = trial_stream.substream(kGenSalt);
    RngStream test_rng = trial_stream.substream(kTestSalt);

    auto t0 = std::chrono::steady_clock::now();
    TrialInputs inputs = cfg.provider(gen_rng);
    Verdict v;
    switch (cfg.tester) {
    case TesterKind::Simple:
        if (!inputs.p_density || !inputs.q_density)
            throw ConfigError("simple tester needs density inputs");
        v = simple_ak_tester(*inputs.p_density, *inputs.q_density, cfg.tester_cfg, test_rng);
        break;
    case TesterKind::General:
        if (!inputs.p_density || !inputs.q_density)
            throw ConfigError("general tester needs density inputs");
        v = general_ak_tester(*inputs.p_density, *inputs.q_density, cfg.tester_cfg, test_rng);
        break;
    case TesterKind::Flat:
        if (!inputs.p_pmf || !inputs.q_pmf)
            throw ConfigError("flat tester needs pmf inputs");
        v = flat_ak_tester(*inputs.p_pmf, *inputs.q_pmf, cfg.tester_cfg.k,
                           cfg.tester_cfg.epsilon, cfg.flat_delta, test_rng, cfg.tester_cfg);
        break;
    }
    auto t1 = std::chrono::steady_clock::now();

    TrialRecord rec;
    rec.index = index;
    rec.decision = v.decision;
    rec.samples_drawn = trace_get(v.trace, "samples_total");
    rec.trace = std::move(v.trace);
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return rec;
}

} // namespace

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw ConfigError("run_trials: trials must be at least 1");
    if (!cfg.provider) throw ConfigError("run_trials: no instance source");
    int workers = std::max(1, cfg.parallelism);

    std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
    if (workers == 1) {
        for (int i = 0; i < cfg.trials; ++i) {
            try {
                records[static_cast<std::size_t>(i)] = run_one(cfg, i);
            } catch (const Error& e) {
                throw Error("trial " + std::to_string(i) + ": " + e.what());
            }
        }
        return records;
    }

    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= cfg.trials) return;
            try {
                records[static_cast<std::size_t>(i)] = run_one(cfg, i);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error)
                    first_error = std::make_exception_ptr(
                        Error("trial " + std::to_string(i) + ": " + e.what()));
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return records;
}

RateSummary wilson_interval(int rejections, int trials) {
    RateSummary s;
    s.trials = trials;
    s.rejections = rejections;
    if (trials <= 0) return s;
    double n = trials;
    double p = static_cast<double>(rejections) / n;
    s.rate = p;
    constexpr double z = 1.959963984540054; // 97.5% normal quantile
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    s.ci_lo = rejections == 0 ? 0.0 : std::max(0.0, center - half);
    s.ci_hi = rejections == trials ? 1.0 : std::min(1.0, center + half);
    return s;
}

RateSummary summarize(const std::vector<TrialRecord>& records) {
    int rej = 0;
    for (const auto& r : records) rej += r.decision == Decision::No;
    return wilson_interval(rej, static_cast<int>(records.size()));
}

InstanceProvider uniform_null_provider() {
    auto d = std::make_shared<const PiecewiseConstantDensity>(uniform_density());
    return [d](RngStream&) {
        TrialInputs in;
        in.p_density = d;
        in.q_density = d;
        return in;
    };
}

InstanceProvider fixed_pair_provider(InstancePair pair) {
    auto p = std::make_shared<const PiecewiseConstantDensity>(std::move(pair.p));
    auto q = std::make_shared<const PiecewiseConstantDensity>(std::move(pair.q));
    return [p, q](RngStream&) {
        TrialInputs in;
        in.p_density = p;
        in.q_density = q;
        return in;
    };
}

InstanceProvider regime_a_provider(int k, double eps) {
    return fixed_pair_provider(regime_a_pair(k, eps));
}

InstanceProvider regime_b_provider(int k, double eps, bool x_is_null) {
    return [k, eps, x_is_null](RngStream& rng) {
        InstancePair pair = regime_b_pair(k, eps, x_is_null, rng);
        TrialInputs in;
        in.p_density = std::make_shared<const PiecewiseConstantDensity>(std::move(pair.p));
        in.q_density = std::make_shared<const PiecewiseConstantDensity>(std::move(pair.q));
        return in;
    };
}

InstanceProvider flat_pair_provider(int t, double eps) {
    return [t, eps](RngStream& rng) {
        InstancePair pair = gen_flat_pair(t, eps, rng);
        TrialInputs in;
        in.p_density = std::make_shared<const PiecewiseConstantDensity>(std::move(pair.p));
        in.q_density = std::make_shared<const PiecewiseConstantDensity>(std::move(pair.q));
        return in;
    };
}

InstanceProvider identical_flat_provider(int t, std::uint64_t salt) {
    RngStream rng(salt, 0);
    auto d = std::make_shared<const PiecewiseConstantDensity>(random_flat_density(t, rng));
    return [d](RngStream&) {
        TrialInputs in;
        in.p_density = d;
        in.q_density = d;
        return in;
    };
}

InstanceProvider file_pair_provider(const std::filesystem::path& p_path,
                                    const std::filesystem::path& q_path) {
    Instance pi = read_instance(p_path);
    Instance qi = read_instance(q_path);
    TrialInputs in;
    if (auto* pd = std::get_if<PiecewiseConstantDensity>(&pi)) {
        in.p_density = std::make_shared<const PiecewiseConstantDensity>(std::move(*pd));
        in.p_pmf = nullptr;
    } else {
        auto pm = std::get<DiscretePmf>(std::move(pi));
        in.p_pmf = std::make_shared<const DiscretePmf>(pm);
        in.p_density = std::make_shared<const PiecewiseConstantDensity>(lift_to_density(pm));
    }
    if (auto* qd = std::get_if<PiecewiseConstantDensity>(&qi)) {
        in.q_density = std::make_shared<const PiecewiseConstantDensity>(std::move(*qd));
        in.q_pmf = nullptr;
    } else {
        auto qm = std::get<DiscretePmf>(std::move(qi));
        in.q_pmf = std::make_shared<const DiscretePmf>(qm);
        in.q_density = std::make_shared<const PiecewiseConstantDensity>(lift_to_density(qm));
    }
    return [in](RngStream&) { return in; };
}

namespace {

double quantile(std::vector<double> xs, double level) {
    std::sort(xs.begin(), xs.end());
    std::size_t idx = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(xs.size()) - 1.0,
                         std::floor(level * static_cast<double>(xs.size()))));
    return xs[idx];
}

} // namespace

CalibrationResult calibrate_thresholds(TesterKind kind, int k, double eps, int trials,
                                       RngStream& rng, double target_type1,
                                       int parallelism) {
    if (trials < 1000) throw ConfigError("calibrate: need at least 1000 trials");
    if (kind == TesterKind::Flat) throw ConfigError("calibrate: flat tester has no Z stage");
    TesterConfig cfg = kind == TesterKind::Simple ? TesterConfig::classical_simple(k, eps)
                                                  : TesterConfig::classical_general(k, eps);
    double m = cfg.m();
    double level = 1.0 - target_type1;
    PiecewiseConstantDensity uni = uniform_density();

    // Null distribution of the order-statistic stage.
    std::vector<double> z_norm(static_cast<std::size_t>(trials));
    {
        RngStream stage_rng = rng.substream(0x7a63616c);
        for (int t = 0; t < trials; ++t) {
            RngStream trial_rng = stage_rng.substream(static_cast<std::uint64_t>(t));
            Trace tmp;
            auto samples = draw_merged_poissonized(uni, uni, m, trial_rng, tmp, "cal");
            z_norm[static_cast<std::size_t>(t)] =
                static_cast<double>(z_statistic(samples)) / std::sqrt(m);
        }
    }

    CalibrationResult res;
    res.target_type1 = target_type1;
    res.trials = trials;
    res.z_quantile = quantile(z_norm, level);
    cfg.z_mult = res.z_quantile;
    res.l2_quantile = 0.0;

    if (kind == TesterKind::General) {
        // Null distribution of the refinement stage's normalized collision
        // statistic, maximized over iterations, levels and groups of one
        // full run.  Thresholds are disabled during simulation so every
        // stage executes.
        TesterConfig probe = cfg;
        probe.z_mult = std::numeric_limits<double>::infinity();
        probe.l2_threshold_frac = std::numeric_limits<double>::infinity();
        ExperimentConfig exp;
        exp.tester = TesterKind::General;
        exp.source_name = "calibration-null";
        exp.provider = uniform_null_provider();
        exp.trials = trials;
        exp.master_seed = rng.substream(0x6c3263616cULL).seed();
        exp.parallelism = parallelism;
        exp.tester_cfg = probe;
        auto records = run_trials(exp);
        std::vector<double> max_u;
        max_u.reserve(records.size());
        for (const auto& rec : records) {
            double mu = 0.0;
            for (const auto& [key, value] : rec.trace) {
                if (key.size() >= 2 && key.compare(key.size() - 2, 2, ".u") == 0)
                    mu = std::max(mu, value);
            }
            max_u.push_back(mu);
        }
        res.l2_quantile = quantile(max_u, level);
        cfg.l2_threshold_frac = std::max(0.5, res.l2_quantile);
    }

    res.config = cfg;
    return res;
}

SweepResult sweep_sample_complexity(const std::vector<int>& k_grid, double eps, int trials,
                                    RngStream& rng, TesterKind kind,
                                    const TesterConfig* base_cfg, int parallelism) {
    if (k_grid.empty()) throw ConfigError("sweep: empty k grid");
    if (trials < 1) throw ConfigError("sweep: trials must be at least 1");
    if (kind == TesterKind::Flat) throw ConfigError("sweep: budget sweeps drive the Z stage");

    SweepResult res;
    res.tester = to_string(kind);
    res.eps = eps;
    res.seed = rng.seed();
    res.trials_per_probe = trials;

    auto probe = [&](int k, const InstanceProvider& provider, double m, bool null_side) {
        TesterConfig cfg = base_cfg ? *base_cfg
                                    : (kind == TesterKind::Simple
                                           ? TesterConfig::calibrated_simple(k, eps)
                                           : TesterConfig::calibrated_general(k, eps));
        cfg.k = k;
        cfg.epsilon = eps;
        cfg.m_override = m;
        ExperimentConfig exp;
        exp.tester = kind;
        exp.source_name = null_side ? "null-uniform" : "regimeA";
        exp.provider = provider;
        exp.trials = trials;
        exp.master_seed = rng.substream((static_cast<std::uint64_t>(k) << 32) ^
                                        (static_cast<std::uint64_t>(m) << 1) ^
                                        (null_side ? 1u : 0u))
                              .seed();
        exp.parallelism = parallelism;
        exp.tester_cfg = cfg;
        RateSummary s = summarize(run_trials(exp));
        res.grid.push_back({k, eps, m, s.trials, s.rejections, s.rate, s.ci_lo, s.ci_hi,
                            null_side});
        return s.rate;
    };

    const double kTargetPower = 2.0 / 3.0;
    for (int k : k_grid) {
        InstanceProvider far = regime_a_provider(k, eps);
        InstanceProvider null = uniform_null_provider();

        double lo = 4.0, hi = 8.0;
        double rate = probe(k, far, hi, false);
        while (rate < kTargetPower && hi < (1 << 17)) {
            lo = hi;
            hi *= 2.0;
            rate = probe(k, far, hi, false);
        }
        // Three geometric bisection rounds; m* stays an estimate.
        for (int round = 0; round < 3 && rate >= kTargetPower; ++round) {
            double mid = std::floor(std::sqrt(lo * hi));
            if (mid <= lo || mid >= hi) break;
            if (probe(k, far, mid, false) >= kTargetPower)
                hi = mid;
            else
                lo = mid;
        }
        probe(k, null, hi, true); // completeness side at the reported budget
        res.m_star.emplace_back(k, hi);
    }

    // Least-squares slope of log m* against log k.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = static_cast<double>(res.m_star.size());
    for (const auto& [k, m] : res.m_star) {
        double x = std::log(static_cast<double>(k));
        double y = std::log(m);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = n * sxx - sx * sx;
    res.slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    return res;
}

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string report_csv(const std::vector<ReportRow>& rows) {
    if (rows.empty()) throw IoError("report: no results to emit");
    std::ostringstream out;
    out << "tester,k,eps,m,trials,reject_rate,ci_lo,ci_hi,seed\n";
    for (const auto& r : rows) {
        out << r.tester << ',' << r.k << ',' << fmt_double(r.eps) << ',' << fmt_double(r.m)
            << ',' << r.trials << ',' << fmt_double(r.reject_rate) << ','
            << fmt_double(r.ci_lo) << ',' << fmt_double(r.ci_hi) << ',' << r.seed << "\n";
    }
    return out.str();
}

void emit_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
    std::string body = report_csv(rows); // validates before the file is touched
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << body;
    if (!out) throw IoError("write failed: " + path.string());
}

Json report_json(const std::vector<ReportRow>& rows) {
    if (rows.empty()) throw IoError("report: no results to emit");
    Json arr = Json::array();
    for (const auto& r : rows) {
        arr.push_back(Json{{"tester", r.tester},
                           {"k", r.k},
                           {"eps", r.eps},
                           {"m", r.m},
                           {"trials", r.trials},
                           {"reject_rate", r.reject_rate},
                           {"ci_lo", r.ci_lo},
                           {"ci_hi", r.ci_hi},
                           {"seed", r.seed}});
    }
    return Json{{"rows", arr}};
}

Json sweep_to_json(const SweepResult& sweep) {
    Json grid = Json::array();
    for (const auto& p : sweep.grid) {
        grid.push_back(Json{{"k", p.k},
                            {"eps", p.eps},
                            {"m", p.m},
                            {"trials", p.trials},
                            {"rejections", p.rejections},
                            {"rate", p.rate},
                            {"ci_lo", p.ci_lo},
                            {"ci_hi", p.ci_hi},
                            {"null_side", p.null_side}});
    }
    Json mstar = Json::array();
    for (const auto& [k, m] : sweep.m_star) mstar.push_back(Json{{"k", k}, {"m", m}});
    return Json{{"tester", sweep.tester},     {"eps", sweep.eps},
                {"seed", sweep.seed},         {"trials_per_probe", sweep.trials_per_probe},
                {"slope", sweep.slope},       {"m_star", mstar},
                {"grid", grid}};
}

SweepResult sweep_from_json(const Json& j) {
    SweepResult s;
    s.tester = j.at("tester").get<std::string>();
    s.eps = j.at("eps").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.trials_per_probe = j.at("trials_per_probe").get<int>();
    s.slope = j.at("slope").get<double>();
    for (const auto& e : j.at("m_star"))
        s.m_star.emplace_back(e.at("k").get<int>(), e.at("m").get<double>());
    for (const auto& e : j.at("grid")) {
        SweepPoint p;
        p.k = e.at("k").get<int>();
        p.eps = e.at("eps").get<double>();
        p.m = e.at("m").get<double>();
        p.trials = e.at("trials").get<int>();
        p.rejections = e.at("rejections").get<int>();
        p.rate = e.at("rate").get<double>();
        p.ci_lo = e.at("ci_lo").get<double>();
        p.ci_hi = e.at("ci_hi").get<double>();
        p.null_side = e.at("null_side").get<bool>();
        s.grid.push_back(p);
    }
    return s;
}

std::vector<ReportRow> sweep_rows(const SweepResult& sweep) {
    std::vector<ReportRow> rows;
    for (const auto& p : sweep.grid) {
        rows.push_back({sweep.tester + (p.null_side ? "-null" : ""), p.k, p.eps, p.m,
                        p.trials, p.rate, p.ci_lo, p.ci_hi, sweep.seed});
    }
    return rows;
}

Json trials_json(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records) {
    RateSummary s = summarize(records);
    Json trials = Json::array();
    for (const auto& r : records) {
        Json trace = Json::object();
        for (const auto& [k, v] : r.trace) trace[k] = v;
        trials.push_back(Json{{"index", r.index},
                              {"decision", to_string(r.decision)},
                              {"samples", r.samples_drawn},
                              {"trace", trace}});
    }
    return Json{{"tester", to_string(cfg.tester)},
                {"source", cfg.source_name},
                {"k", cfg.tester_cfg.k},
                {"eps", cfg.tester_cfg.epsilon},
                {"m", cfg.tester_cfg.m()},
                {"trials", s.trials},
                {"reject_rate", s.rate},
                {"ci_lo", s.ci_lo},
                {"ci_hi", s.ci_hi},
                {"seed", cfg.master_seed},
                {"records", trials}};
}

} // namespace akct
