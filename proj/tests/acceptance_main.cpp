// Acceptance suite: one PASS/FAIL line per criterion, exit 1 on any FAIL.
// Criteria can be selected by number on the command line, e.g.
// `acceptance 3 9`.  Criterion 10 invokes the CLI binary; its path comes
// from AKCT_BIN or, failing that, from the build layout next to this
// binary.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "akct/harness.hpp"
#include "akct/instances.hpp"
#include "akct/metrics.hpp"
#include "akct/testers.hpp"

using namespace akct;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_bin;

int workers() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 4 : static_cast<int>(std::min(hc, 8u));
}

void report(int criterion, bool pass, const std::string& what, double seconds) {
    std::ostringstream line;
    line << (pass ? "PASS" : "FAIL") << " criterion " << criterion << ": " << what << " ["
         << std::fixed;
    line.precision(1);
    line << seconds << "s]";
    std::cout << line.str() << std::endl;
    if (!pass) ++g_failures;
}

template <typename F>
void run_criterion(int criterion, const std::string& what, F&& body) {
    auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail = what;
    try {
        detail = body();
        pass = true;
    } catch (const std::exception& e) {
        detail = what + " -- " + e.what();
    }
    auto t1 = std::chrono::steady_clock::now();
    report(criterion, pass, detail, std::chrono::duration<double>(t1 - t0).count());
}

struct CriterionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw CriterionFailure(msg);
}

DiscretePmf random_dyadic_pmf(std::size_t n, RngStream& rng) {
    const std::int64_t scale = 4096;
    std::vector<std::int64_t> parts(n, 0);
    std::int64_t remaining = scale;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        parts[i] = static_cast<std::int64_t>(
            rng.uniform_below(static_cast<std::uint64_t>(remaining) + 1));
        remaining -= parts[i];
    }
    parts[n - 1] = remaining;
    for (std::size_t i = n - 1; i > 0; --i) std::swap(parts[i], parts[rng.uniform_below(i + 1)]);
    std::vector<double> masses(n);
    for (std::size_t i = 0; i < n; ++i)
        masses[i] = static_cast<double>(parts[i]) / static_cast<double>(scale);
    return DiscretePmf::make(std::move(masses));
}

DiscretePmf random_positive_pmf(std::size_t n, RngStream& rng) {
    std::vector<double> masses(n);
    double total = 0.0;
    for (auto& m : masses) {
        m = rng.exponential() + 1e-6;
        total += m;
    }
    for (auto& m : masses) m /= total;
    return DiscretePmf::make(std::move(masses));
}

PiecewiseConstantDensity random_density(int pieces, RngStream& rng) {
    for (;;) {
        std::vector<double> bp{0.0};
        for (int i = 1; i < pieces; ++i) bp.push_back(rng.uniform());
        bp.push_back(1.0);
        std::sort(bp.begin(), bp.end());
        bool ok = true;
        for (std::size_t i = 0; i + 1 < bp.size(); ++i)
            if (!(bp[i] < bp[i + 1])) ok = false;
        if (!ok) continue;
        std::vector<double> mass(static_cast<std::size_t>(pieces));
        double total = 0.0;
        for (auto& m : mass) {
            m = rng.uniform() < 0.15 ? 0.0 : rng.exponential();
            total += m;
        }
        if (total <= 0.0) continue;
        std::vector<double> h(mass.size());
        for (std::size_t i = 0; i < mass.size(); ++i)
            h[i] = mass[i] / total / (bp[i + 1] - bp[i]);
        return make_pwc(bp, h);
    }
}

double rejection_rate(TesterKind kind, const InstanceProvider& prov, const TesterConfig& cfg,
                      int trials, std::uint64_t seed) {
    ExperimentConfig e;
    e.tester = kind;
    e.provider = prov;
    e.trials = trials;
    e.master_seed = seed;
    e.parallelism = workers();
    e.tester_cfg = cfg;
    return summarize(run_trials(e)).rate;
}

std::string c1_oracle_equivalence() {
    RngStream rng(1001, 0);
    for (int rep = 0; rep < 1000; ++rep) {
        std::size_t n = 2 + rng.uniform_below(11);
        int k = 1 + static_cast<int>(rng.uniform_below(4));
        auto p = random_dyadic_pmf(n, rng);
        auto q = random_dyadic_pmf(n, rng);
        double dp = ak_distance_discrete(p, q, k);
        double bf = ak_distance_bruteforce(p, q, k);
        require(dp == bf, "DP " + fmt_double(dp) + " != brute " + fmt_double(bf) +
                              " at rep " + std::to_string(rep));
    }
    return "A_k DP equals the enumeration oracle exactly on 1000 instances (n<=12, k<=4)";
}

std::string c2_hard_instance_certification() {
    for (int k : {1, 4, 16, 64}) {
        for (double eps : {0.25, 0.5, 1.0}) {
            auto pair = regime_a_pair(k, eps);
            double dist = ak_distance_pwc(pair.p, pair.q, 2 * k + 1);
            require(std::fabs(dist - 2.0 * eps) <= 1e-9,
                    "A_{2k+1} = " + fmt_double(dist) + " != 2 eps at k=" +
                        std::to_string(k) + " eps=" + fmt_double(eps));
        }
    }
    return "regime-A pairs certify A_{2k+1} = 2 eps to 1e-9 over the (k, eps) grid";
}

std::string c3_null_z_distribution() {
    const double m = 1000.0;
    const int trials = 20000;
    TesterConfig cfg = TesterConfig::classical_simple(8, 0.5);
    cfg.m_override = m;
    ExperimentConfig e;
    e.tester = TesterKind::Simple;
    e.provider = uniform_null_provider();
    e.trials = trials;
    e.master_seed = 1003;
    e.parallelism = workers();
    e.tester_cfg = cfg;
    auto records = run_trials(e);
    double s = 0.0, s2 = 0.0;
    for (const auto& r : records) {
        double z = trace_get(r.trace, "stage1.z");
        s += z;
        s2 += z * z;
    }
    double mean = s / trials;
    double var = s2 / trials - mean * mean;
    double want_var = 2.0 * m - 1.0;
    require(std::fabs(mean) <= 0.05 * std::sqrt(2.0 * m),
            "null mean(Z) = " + fmt_double(mean) + " exceeds 0.05 sqrt(2m)");
    require(std::fabs(var - want_var) <= 0.10 * want_var,
            "null var(Z) = " + fmt_double(var) + " outside 10% of 2m-1");
    return "null Z at m=1000: mean " + fmt_double(mean) + ", variance " + fmt_double(var) +
           " vs 2m-1 = " + fmt_double(want_var) + " over 2e4 trials";
}

std::string c4_completeness() {
    TesterConfig cfg = TesterConfig::calibrated_general(64, 0.5);
    std::vector<std::pair<std::string, InstanceProvider>> sources;
    sources.emplace_back("uniform", uniform_null_provider());
    int flats[] = {2, 3, 5, 8, 10};
    for (int t : flats)
        sources.emplace_back("flat t=" + std::to_string(t),
                             identical_flat_provider(t, 9000 + static_cast<std::uint64_t>(t)));
    std::string detail = "identical-pair acceptance at k=64, eps=0.5, 500 trials:";
    std::uint64_t seed = 1004;
    for (const auto& [name, prov] : sources) {
        double reject = rejection_rate(TesterKind::General, prov, cfg, 500, seed++);
        double accept = 1.0 - reject;
        detail += " " + name + "=" + fmt_double(accept);
        require(accept >= 2.0 / 3.0, name + " acceptance " + fmt_double(accept) + " < 2/3");
    }
    return detail;
}

std::string c5_soundness() {
    TesterConfig cfg = TesterConfig::calibrated_general(64, 0.5);
    double reject =
        rejection_rate(TesterKind::General, regime_a_provider(64, 0.5), cfg, 500, 1005);
    require(reject >= 2.0 / 3.0, "rejection " + fmt_double(reject) + " < 2/3");
    return "regime-A rejection at calibrated m = C k^{4/5}/eps^{6/5}: " + fmt_double(reject) +
           " over 500 trials";
}

std::string c6_minibucket_enumeration() {
    for (int r : {0, 1, 2}) {
        auto dist = minibucket_order_distribution(r);
        require(dist.tv == Rational(0),
                "TV at r=" + std::to_string(r) + " is " + dist.tv.str() + ", want 0");
    }
    auto three = minibucket_order_distribution(3);
    require(three.tv > Rational(0), "TV at r=3 is zero");
    return "mini-bucket order distributions: TV = 0 exactly for r<=2, TV = " +
           three.tv.str() + " at r=3";
}

std::string c7_flattening() {
    RngStream rng(1007, 0);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        auto p = random_density(1 + static_cast<int>(rng.uniform_below(6)), rng);
        auto q = random_density(1 + static_cast<int>(rng.uniform_below(6)), rng);
        auto [fp, fq] = flatten_pair(p, q);
        for (std::size_t i = 0; i < fp.piece_count(); ++i)
            worst = std::max(worst, std::fabs(fp.heights()[i] + fq.heights()[i] - 2.0));
        require(worst < 1e-9, "flattened heights drift from 2 by " + fmt_double(worst));

        SignRunReduction orig = sign_run_reduction(p, q);
        SignRunReduction flat = sign_run_reduction(fp, fq);
        require(orig.p_masses.size() <= 16 && flat.p_masses.size() <= 16,
                "run reduction exceeded the oracle size");
        for (int k = 1; k <= 4; ++k) {
            double a0 = ak_distance_bruteforce(DiscretePmf::make(orig.p_masses),
                                               DiscretePmf::make(orig.q_masses), k);
            double a1 = ak_distance_bruteforce(DiscretePmf::make(flat.p_masses),
                                               DiscretePmf::make(flat.q_masses), k);
            require(std::fabs(a0 - a1) <= 1e-9,
                    "A_" + std::to_string(k) + " changed under flattening: " +
                        fmt_double(a0) + " vs " + fmt_double(a1));
        }
    }
    return "flattening preserves A_k (k<=4, enumeration oracle) on 200 pairs; max height "
           "defect " +
           fmt_double(worst);
}

std::string c8_appendix_inequalities() {
    RngStream rng(1008, 0);
    for (int rep = 0; rep < 500; ++rep) {
        int k = rng.uniform() < 0.5 ? 2 : 4;
        std::size_t ratio = rng.uniform() < 0.5 ? 2 : 4;
        std::size_t n = static_cast<std::size_t>(k) * ratio;
        auto p = random_positive_pmf(n, rng);
        auto q = random_positive_pmf(n, rng);
        double ss = scale_sensitive_l2(p, q, k);
        double ak = ak_distance_discrete(p, q, k);
        require(ss >= ak * ak / std::pow(2.0 * k, 7.0 / 8.0) - 1e-12,
                "scale-sensitive bound failed at rep " + std::to_string(rep));
        double dyadic = dyadic_level_discrepancy_sum(p, q, k);
        require(ss <= 1e8 * dyadic + 1e-15,
                "dyadic-sum bound failed at rep " + std::to_string(rep));
    }
    return "scale-sensitive L2 >= A_k^2/(2k)^{7/8} and <= 1e8 * dyadic level sum on 500 "
           "instances";
}

std::string c9_sample_complexity_shape() {
    RngStream rng(1009, 0);
    auto sweep = sweep_sample_complexity({16, 32, 64, 128}, 0.5, 250, rng,
                                         TesterKind::Simple, nullptr, workers());
    std::string mstars;
    for (const auto& [k, m] : sweep.m_star)
        mstars += " m*(" + std::to_string(k) + ")=" + fmt_double(m);
    require(sweep.slope >= 0.65 && sweep.slope <= 0.95,
            "slope " + fmt_double(sweep.slope) + " outside [0.65, 0.95];" + mstars);
    return "log-log slope of m*(k) is " + fmt_double(sweep.slope) + " (theory 4/5);" + mstars;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "missing output file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void run_cli(const std::string& args) {
    std::string cmd = g_bin + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    require(rc == 0, "CLI exited with " + std::to_string(rc) + ": " + args);
}

std::string c10_cli_determinism() {
    require(!g_bin.empty() && fs::exists(g_bin), "CLI binary not found at '" + g_bin + "'");
    fs::path dir = fs::temp_directory_path() / "akct_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string d = dir.string();

    for (int round = 1; round <= 2; ++round) {
        std::string r = std::to_string(round);
        run_cli("gen --construction regimeB --k 8 --eps 0.5 --seed 77 --out " + d + "/gen" + r);
        run_cli("trial --tester general --source regimeA --k 8 --eps 0.5 --trials 25 "
                "--seed 3 --parallelism 4 --format json --out " +
                d + "/trial" + r + ".json");
        run_cli("trial --tester simple --source null-uniform --k 16 --eps 0.5 --trials 60 "
                "--seed 4 --format csv --out " +
                d + "/trial" + r + ".csv");
        run_cli("sweep --k-grid 8,16 --eps 0.5 --trials 40 --seed 11 --parallelism 4 "
                "--format csv --out " +
                d + "/sweep" + r + ".csv");
    }
    for (const char* f : {"p.json", "q.json", "manifest.json"})
        require(slurp(dir / "gen1" / f) == slurp(dir / "gen2" / f),
                std::string("gen output differs: ") + f);
    require(slurp(dir / "trial1.json") == slurp(dir / "trial2.json"),
            "trial JSON output differs");
    require(slurp(dir / "trial1.csv") == slurp(dir / "trial2.csv"),
            "trial CSV output differs");
    require(slurp(dir / "sweep1.csv") == slurp(dir / "sweep2.csv"),
            "sweep CSV output differs");
    fs::remove_all(dir);
    return "gen/trial/sweep outputs are byte-identical across repeated seeded runs";
}

} // namespace

int main(int argc, char** argv) {
    if (const char* env = std::getenv("AKCT_BIN")) {
        g_bin = env;
    } else {
        fs::path self(argv[0]);
        fs::path guess = self.parent_path().parent_path() / "tools" / "akct";
        if (fs::exists(guess)) g_bin = guess.string();
    }

    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    auto wanted = [&](int c) { return selected.empty() || selected.count(c) > 0; };

    if (wanted(1)) run_criterion(1, "A_k oracle correctness", c1_oracle_equivalence);
    if (wanted(2)) run_criterion(2, "hard-instance certification", c2_hard_instance_certification);
    if (wanted(3)) run_criterion(3, "null Z distribution", c3_null_z_distribution);
    if (wanted(4)) run_criterion(4, "completeness", c4_completeness);
    if (wanted(5)) run_criterion(5, "soundness", c5_soundness);
    if (wanted(6)) run_criterion(6, "mini-bucket order enumeration", c6_minibucket_enumeration);
    if (wanted(7)) run_criterion(7, "flattening identity", c7_flattening);
    if (wanted(8)) run_criterion(8, "appendix inequality suite", c8_appendix_inequalities);
    if (wanted(9)) run_criterion(9, "sample-complexity shape", c9_sample_complexity_shape);
    if (wanted(10)) run_criterion(10, "CLI determinism", c10_cli_determinism);

    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    std::cout << "all criteria passed" << std::endl;
    return 0;
}
