// akct - A_k closeness testing toolkit.
//
// Subcommands: akdist, test, gen, calibrate, trial, sweep, report.
// Exit codes: 0 completed, 2 configuration error, 3 threshold violation in
// --check mode.  All randomized commands are pure functions of --seed
// (default from AKCT_SEED, else 0).

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "akct/harness.hpp"
#include "akct/instances.hpp"
#include "akct/metrics.hpp"

using namespace akct;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCheck = 3;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("AKCT_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw ConfigError("AKCT_SEED is not an integer: " + std::string(env));
        }
    }
    return 0;
}

void apply_config_overrides(TesterConfig& cfg, const Json& j) {
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("k", cfg.k);
    get("epsilon", cfg.epsilon);
    get("sample_mult", cfg.sample_mult);
    get("m_override", cfg.m_override);
    get("z_mult", cfg.z_mult);
    get("repetitions", cfg.repetitions);
    get("inner_eps_div", cfg.inner_eps_div);
    get("inner_delta", cfg.inner_delta);
    get("j0_offset", cfg.j0_offset);
    get("schedule_eps_mult", cfg.schedule_eps_mult);
    get("l2_budget_mult", cfg.l2_budget_mult);
    get("l2_threshold_frac", cfg.l2_threshold_frac);
}

Json config_to_json(const TesterConfig& cfg) {
    return Json{{"k", cfg.k},
                {"epsilon", cfg.epsilon},
                {"sample_mult", cfg.sample_mult},
                {"m_override", cfg.m_override},
                {"z_mult", cfg.z_mult},
                {"repetitions", cfg.repetitions},
                {"inner_eps_div", cfg.inner_eps_div},
                {"inner_delta", cfg.inner_delta},
                {"j0_offset", cfg.j0_offset},
                {"schedule_eps_mult", cfg.schedule_eps_mult},
                {"l2_budget_mult", cfg.l2_budget_mult},
                {"l2_threshold_frac", cfg.l2_threshold_frac}};
}

TesterConfig build_config(TesterKind kind, int k, double eps, bool classical_literals,
                          const std::string& config_path) {
    TesterConfig cfg;
    if (classical_literals)
        cfg = kind == TesterKind::Simple ? TesterConfig::classical_simple(k, eps)
                                         : TesterConfig::classical_general(k, eps);
    else
        cfg = kind == TesterKind::Simple ? TesterConfig::calibrated_simple(k, eps)
                                         : TesterConfig::calibrated_general(k, eps);
    if (kind == TesterKind::Flat) {
        cfg = TesterConfig();
        cfg.k = k;
        cfg.epsilon = eps;
    }
    if (!config_path.empty()) apply_config_overrides(cfg, read_json(config_path));
    return cfg;
}

Json verdict_json(const char* tester, const TesterConfig& cfg, std::uint64_t seed,
                  const Verdict& v) {
    Json trace = Json::object();
    for (const auto& [key, value] : v.trace) trace[key] = value;
    return Json{{"tester", tester}, {"k", cfg.k},     {"eps", cfg.epsilon},
                {"seed", seed},     {"decision", to_string(v.decision)}, {"trace", trace}};
}

void emit(const Json& j, const std::string& out_path) {
    if (out_path.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json(out_path, j);
}

int cmd_akdist(const std::string& p_path, const std::string& q_path, int k, bool brute) {
    Instance pi = read_instance(p_path);
    Instance qi = read_instance(q_path);
    Json out;
    if (std::holds_alternative<DiscretePmf>(pi) && std::holds_alternative<DiscretePmf>(qi)) {
        const auto& p = std::get<DiscretePmf>(pi);
        const auto& q = std::get<DiscretePmf>(qi);
        AkDiscreteResult res = brute ? ak_distance_bruteforce_with_cuts(p, q, k)
                                     : ak_distance_discrete_with_cuts(p, q, k);
        out = Json{{"k", k},
                   {"method", brute ? "bruteforce" : "dp"},
                   {"distance", res.value},
                   {"cuts", res.cuts}};
    } else if (std::holds_alternative<PiecewiseConstantDensity>(pi) &&
               std::holds_alternative<PiecewiseConstantDensity>(qi)) {
        const auto& p = std::get<PiecewiseConstantDensity>(pi);
        const auto& q = std::get<PiecewiseConstantDensity>(qi);
        if (brute) {
            SignRunReduction red = sign_run_reduction(p, q);
            AkDiscreteResult res = ak_distance_bruteforce_with_cuts(
                DiscretePmf::make(red.p_masses), DiscretePmf::make(red.q_masses), k);
            std::vector<double> xs;
            for (std::size_t c : res.cuts) xs.push_back(red.boundaries[c]);
            out = Json{{"k", k},
                       {"method", "bruteforce"},
                       {"distance", res.value},
                       {"cuts", xs}};
        } else {
            AkPwcResult res = ak_distance_pwc_with_cuts(p, q, k);
            out = Json{{"k", k}, {"method", "dp"}, {"distance", res.value},
                       {"cuts", res.cut_points}};
        }
    } else {
        throw ConfigError("akdist: --p and --q must both be densities or both pmfs");
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_test(const std::string& tester, const std::string& p_path, const std::string& q_path,
             int k, double eps, std::uint64_t seed, const std::string& config_path,
             bool classical_literals) {
    TesterKind kind = tester_kind_from_string(tester);
    TesterConfig cfg = build_config(kind, k, eps, classical_literals, config_path);
    RngStream rng(seed, 0);
    Instance pi = read_instance(p_path);
    Instance qi = read_instance(q_path);

    Verdict v;
    if (kind == TesterKind::Flat) {
        auto* pp = std::get_if<DiscretePmf>(&pi);
        auto* qp = std::get_if<DiscretePmf>(&qi);
        if (!pp || !qp) throw ConfigError("test: the flat tester takes pmf files");
        v = flat_ak_tester(*pp, *qp, cfg.k, cfg.epsilon, 1.0 / 3.0, rng, cfg);
    } else {
        // pmf inputs are lifted to bin-uniform densities; sampling then
        // jitters each discrete draw within its bin, breaking ties at random.
        auto as_density = [](Instance& inst) {
            if (auto* d = std::get_if<PiecewiseConstantDensity>(&inst)) return *d;
            return lift_to_density(std::get<DiscretePmf>(inst));
        };
        PiecewiseConstantDensity p = as_density(pi);
        PiecewiseConstantDensity q = as_density(qi);
        v = kind == TesterKind::Simple ? simple_ak_tester(p, q, cfg, rng)
                                       : general_ak_tester(p, q, cfg, rng);
    }
    std::cout << verdict_json(tester.c_str(), cfg, seed, v).dump(2) << "\n";
    return kExitOk;
}

int cmd_gen(const std::string& construction, int k, double eps, std::uint64_t seed,
            const std::string& out_dir, bool null_pair) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    RngStream rng(seed, 0);
    InstancePair pair;
    if (construction == "regimeA") {
        pair = regime_a_pair(k, eps);
    } else if (construction == "regimeB") {
        pair = regime_b_pair(k, eps, null_pair, rng);
    } else if (construction == "flatpair") {
        pair = gen_flat_pair(k, eps, rng); // k doubles as the piece budget t
    } else {
        throw ConfigError("gen: unknown construction " + construction);
    }
    pair.provenance.seed = seed;

    fs::path dir(out_dir);
    write_json(dir / "p.json", density_to_json(pair.p));
    write_json(dir / "q.json", density_to_json(pair.q));
    Json manifest{{"construction", pair.provenance.construction},
                  {"k", pair.provenance.k},
                  {"eps", pair.provenance.eps},
                  {"seed", seed},
                  {"identical", pair.identical},
                  {"k_certified", pair.k_certified},
                  {"ak_value", pair.ak_value},
                  {"note", pair.provenance.note},
                  {"files", Json{{"p", "p.json"}, {"q", "q.json"}}}};
    write_json(dir / "manifest.json", manifest);
    std::cout << manifest.dump(2) << "\n";
    return kExitOk;
}

int cmd_calibrate(const std::string& tester, int k, double eps, int trials,
                  std::uint64_t seed, double target, int parallelism) {
    TesterKind kind = tester_kind_from_string(tester);
    RngStream rng(seed, 0);
    CalibrationResult res = calibrate_thresholds(kind, k, eps, trials, rng, target,
                                                 parallelism);
    Json out{{"tester", tester},
             {"k", k},
             {"eps", eps},
             {"seed", seed},
             {"trials", res.trials},
             {"target_type1", res.target_type1},
             {"z_quantile", res.z_quantile},
             {"l2_quantile", res.l2_quantile},
             {"config", config_to_json(res.config)}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

struct CheckBounds {
    std::optional<double> min_rate;
    std::optional<double> max_rate;
};

InstanceProvider make_provider(const std::string& source, int k, double eps, int t,
                               const std::string& p_path, const std::string& q_path) {
    if (source == "null-uniform") return uniform_null_provider();
    if (source == "regimeA") return regime_a_provider(k, eps);
    if (source == "regimeB") return regime_b_provider(k, eps, false);
    if (source == "regimeB-null") return regime_b_provider(k, eps, true);
    if (source == "flatpair") return flat_pair_provider(t > 0 ? t : k, eps);
    if (source == "null-flat") return identical_flat_provider(t > 0 ? t : 4, 1);
    if (source == "files") {
        if (p_path.empty() || q_path.empty())
            throw ConfigError("trial: source=files needs --p and --q");
        return file_pair_provider(p_path, q_path);
    }
    throw ConfigError("trial: unknown source " + source);
}

int cmd_trial(const std::string& tester, const std::string& source, int k, double eps, int t,
              int trials, std::uint64_t seed, double m_override, int parallelism,
              const std::string& p_path, const std::string& q_path,
              const std::string& config_path, bool classical_literals,
              const std::string& out_path, const std::string& format, bool check,
              const CheckBounds& bounds) {
    ExperimentConfig exp;
    exp.tester = tester_kind_from_string(tester);
    exp.source_name = source;
    exp.provider = make_provider(source, k, eps, t, p_path, q_path);
    exp.trials = trials;
    exp.master_seed = seed;
    exp.parallelism = parallelism;
    exp.tester_cfg = build_config(exp.tester, k, eps, classical_literals, config_path);
    if (m_override > 0) exp.tester_cfg.m_override = m_override;

    auto records = run_trials(exp);
    RateSummary s = summarize(records);
    std::vector<ReportRow> rows{{to_string(exp.tester), k, eps, exp.tester_cfg.m(), s.trials,
                                 s.rate, s.ci_lo, s.ci_hi, seed}};
    if (format == "csv") {
        if (out_path.empty())
            std::cout << report_csv(rows);
        else
            emit_report_csv(out_path, rows);
    } else {
        emit(trials_json(exp, records), out_path);
    }

    if (check) {
        if (bounds.min_rate && s.rate < *bounds.min_rate) {
            std::cerr << "check failed: reject_rate " << fmt_double(s.rate) << " < "
                      << fmt_double(*bounds.min_rate) << "\n";
            return kExitCheck;
        }
        if (bounds.max_rate && s.rate > *bounds.max_rate) {
            std::cerr << "check failed: reject_rate " << fmt_double(s.rate) << " > "
                      << fmt_double(*bounds.max_rate) << "\n";
            return kExitCheck;
        }
    }
    return kExitOk;
}

int cmd_sweep(const std::string& k_grid_str, double eps, int trials, std::uint64_t seed,
              const std::string& tester, int parallelism, const std::string& out_path,
              const std::string& format, bool check, double slope_min, double slope_max) {
    std::vector<int> k_grid;
    std::stringstream ss(k_grid_str);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) k_grid.push_back(std::stoi(item));
    }
    RngStream rng(seed, 0);
    SweepResult sweep = sweep_sample_complexity(k_grid, eps, trials, rng,
                                                tester_kind_from_string(tester), nullptr,
                                                parallelism);
    if (format == "csv") {
        if (out_path.empty())
            std::cout << report_csv(sweep_rows(sweep));
        else
            emit_report_csv(out_path, sweep_rows(sweep));
        std::cerr << "slope " << fmt_double(sweep.slope) << "\n";
    } else {
        emit(sweep_to_json(sweep), out_path);
    }
    if (check && (sweep.slope < slope_min || sweep.slope > slope_max)) {
        std::cerr << "check failed: slope " << fmt_double(sweep.slope) << " outside ["
                  << fmt_double(slope_min) << ", " << fmt_double(slope_max) << "]\n";
        return kExitCheck;
    }
    return kExitOk;
}

int cmd_report(const std::string& in_path, const std::string& format,
               const std::string& out_path) {
    Json j = read_json(in_path);
    std::vector<ReportRow> rows;
    if (j.contains("grid")) {
        rows = sweep_rows(sweep_from_json(j));
    } else if (j.contains("rows")) {
        for (const auto& e : j.at("rows"))
            rows.push_back({e.at("tester").get<std::string>(), e.at("k").get<int>(),
                            e.at("eps").get<double>(), e.at("m").get<double>(),
                            e.at("trials").get<int>(), e.at("reject_rate").get<double>(),
                            e.at("ci_lo").get<double>(), e.at("ci_hi").get<double>(),
                            e.at("seed").get<std::uint64_t>()});
    } else if (j.contains("records")) {
        rows.push_back({j.at("tester").get<std::string>(), j.at("k").get<int>(),
                        j.at("eps").get<double>(), j.at("m").get<double>(),
                        j.at("trials").get<int>(), j.at("reject_rate").get<double>(),
                        j.at("ci_lo").get<double>(), j.at("ci_hi").get<double>(),
                        j.at("seed").get<std::uint64_t>()});
    } else {
        throw ConfigError("report: unrecognized result file shape");
    }
    if (format == "csv") {
        if (out_path.empty())
            std::cout << report_csv(rows);
        else
            emit_report_csv(out_path, rows);
    } else {
        emit(report_json(rows), out_path);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"A_k closeness testing toolkit"};
    app.require_subcommand(1);

    std::string p_path, q_path, config_path, out_path, out_dir;
    std::string tester = "general", source = "null-uniform", construction = "regimeA";
    std::string format = "json", k_grid = "16,32,64,128", in_path;
    int k = 2, trials = 100, parallelism = 1, t = 0;
    double eps = 0.5, m_override = 0.0, target = 0.125;
    double slope_min = 0.65, slope_max = 0.95;
    std::uint64_t seed = 0;
    bool brute = false, null_pair = false, classical_literals = false, check = false;
    CheckBounds bounds;
    double min_rate = -1.0, max_rate = 2.0;

    auto* akdist = app.add_subcommand("akdist", "exact A_k distance between two instances");
    akdist->add_option("--p", p_path, "instance file for p")->required();
    akdist->add_option("--q", q_path, "instance file for q")->required();
    akdist->add_option("--k", k, "number of intervals")->required();
    akdist->add_flag("--brute", brute, "use the enumeration oracle (n <= 16)");

    auto* test = app.add_subcommand("test", "run one tester on an instance pair");
    test->add_option("--tester", tester, "simple|flat|general")->required();
    test->add_option("--p", p_path, "instance file for p")->required();
    test->add_option("--q", q_path, "instance file for q")->required();
    test->add_option("--k", k, "partition budget k")->required();
    test->add_option("--eps", eps, "distance threshold")->required();
    test->add_option("--seed", seed, "rng seed (default AKCT_SEED or 0)");
    test->add_option("--config", config_path, "JSON tester-config overrides");
    test->add_flag("--classical", classical_literals, "classical literal thresholds (3/5 sqrt(m))");

    auto* gen = app.add_subcommand("gen", "generate a ground-truth instance pair");
    gen->add_option("--construction", construction, "regimeA|regimeB|flatpair")->required();
    gen->add_option("--k", k, "buckets (regimes) or pieces t (flatpair)")->required();
    gen->add_option("--eps", eps, "distance parameter")->required();
    gen->add_option("--seed", seed, "rng seed");
    gen->add_option("--out", out_dir, "output directory")->required();
    gen->add_flag("--null", null_pair, "regimeB: emit the identical-pair branch");

    auto* calibrate = app.add_subcommand("calibrate", "null-simulate and set thresholds");
    calibrate->add_option("--tester", tester, "simple|general")->required();
    calibrate->add_option("--k", k, "partition budget k")->required();
    calibrate->add_option("--eps", eps, "distance threshold")->required();
    calibrate->add_option("--trials", trials, "null simulations (>= 1000)")->required();
    calibrate->add_option("--seed", seed, "rng seed");
    calibrate->add_option("--target", target, "per-stage type-I budget (default 0.125)");
    calibrate->add_option("--parallelism", parallelism, "worker threads");

    auto* trial = app.add_subcommand("trial", "Monte Carlo rejection-rate estimate");
    trial->add_option("--tester", tester, "simple|flat|general")->required();
    trial->add_option("--source", source,
                      "null-uniform|regimeA|regimeB|regimeB-null|flatpair|null-flat|files")
        ->required();
    trial->add_option("--k", k, "partition budget k")->required();
    trial->add_option("--eps", eps, "distance threshold")->required();
    trial->add_option("--t", t, "piece budget for flatpair/null-flat sources");
    trial->add_option("--trials", trials, "trial count")->required();
    trial->add_option("--seed", seed, "rng seed");
    trial->add_option("--m", m_override, "override the Poissonized budget m");
    trial->add_option("--parallelism", parallelism, "worker threads");
    trial->add_option("--p", p_path, "instance file for p (source=files)");
    trial->add_option("--q", q_path, "instance file for q (source=files)");
    trial->add_option("--config", config_path, "JSON tester-config overrides");
    trial->add_flag("--classical", classical_literals, "classical literal thresholds");
    trial->add_option("--out", out_path, "write results here instead of stdout");
    trial->add_option("--format", format, "csv|json (default json)");
    trial->add_flag("--check", check, "enforce --min-rate/--max-rate (exit 3)");
    trial->add_option("--min-rate", min_rate, "minimum acceptable reject rate");
    trial->add_option("--max-rate", max_rate, "maximum acceptable reject rate");

    auto* sweep = app.add_subcommand("sweep", "sample-complexity sweep over k");
    sweep->add_option("--k-grid", k_grid, "comma-separated k values");
    sweep->add_option("--eps", eps, "distance threshold")->required();
    sweep->add_option("--trials", trials, "trials per probe")->required();
    sweep->add_option("--seed", seed, "rng seed");
    sweep->add_option("--tester", tester, "simple|general (default simple)")
        ->default_val("simple");
    sweep->add_option("--parallelism", parallelism, "worker threads");
    sweep->add_option("--out", out_path, "write results here instead of stdout");
    sweep->add_option("--format", format, "csv|json (default json)");
    sweep->add_flag("--check", check, "enforce --slope-min/--slope-max (exit 3)");
    sweep->add_option("--slope-min", slope_min, "minimum acceptable log-log slope");
    sweep->add_option("--slope-max", slope_max, "maximum acceptable log-log slope");

    auto* report = app.add_subcommand("report", "re-emit a result file as CSV or JSON");
    report->add_option("--in", in_path, "input JSON result file")->required();
    report->add_option("--format", format, "csv|json")->required();
    report->add_option("--out", out_path, "output file (default stdout)");

    try {
        seed = default_seed();
        app.parse(argc, argv);
        if (min_rate >= 0.0) bounds.min_rate = min_rate;
        if (max_rate <= 1.0) bounds.max_rate = max_rate;

        if (*akdist) return cmd_akdist(p_path, q_path, k, brute);
        if (*test)
            return cmd_test(tester, p_path, q_path, k, eps, seed, config_path,
                            classical_literals);
        if (*gen) return cmd_gen(construction, k, eps, seed, out_dir, null_pair);
        if (*calibrate) return cmd_calibrate(tester, k, eps, trials, seed, target,
                                             parallelism);
        if (*trial)
            return cmd_trial(tester, source, k, eps, t, trials, seed, m_override,
                             parallelism, p_path, q_path, config_path, classical_literals,
                             out_path, format, check, bounds);
        if (*sweep)
            return cmd_sweep(k_grid, eps, trials, seed, tester, parallelism, out_path,
                             format, check, slope_min, slope_max);
        if (*report) return cmd_report(in_path, format, out_path);
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
