#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "akct/instances.hpp"
#include "akct/metrics.hpp"

using namespace akct;

namespace {

// Random pmf whose masses sit on a 2^-12 grid, so that prefix sums, interval
// masses and their absolute differences are all exact in double arithmetic
// and the DP can be compared to the brute force with operator==.
DiscretePmf random_dyadic_pmf(std::size_t n, RngStream& rng) {
    const std::int64_t kScale = 4096;
    std::vector<std::int64_t> parts(n, 0);
    std::int64_t remaining = kScale;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        parts[i] = static_cast<std::int64_t>(
            rng.uniform_below(static_cast<std::uint64_t>(remaining) + 1));
        remaining -= parts[i];
    }
    parts[n - 1] = remaining;
    // Shuffle so the leftover mass is not biased toward the last bin.
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(parts[i], parts[rng.uniform_below(i + 1)]);
    std::vector<double> masses(n);
    for (std::size_t i = 0; i < n; ++i)
        masses[i] = static_cast<double>(parts[i]) / static_cast<double>(kScale);
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

} // namespace

TEST_CASE("reduced_pmf on densities and pmfs") {
    auto uni = make_pwc({0, 1}, {1});
    auto quarters = IntervalPartition::make({0, 0.25, 0.5, 0.75, 1});
    auto r = reduced_pmf(uni, quarters);
    for (double m : r.masses()) CHECK(m == doctest::Approx(0.25));

    auto whole = IntervalPartition::make({0.0, 1.0});
    CHECK(reduced_pmf(uni, whole).masses() == std::vector<double>{1.0});

    auto half = make_pwc({0, 0.5, 1}, {2, 0});
    auto r2 = reduced_pmf(half, IntervalPartition::make({0, 0.25, 1}));
    CHECK(r2[0] == doctest::Approx(0.5));
    CHECK(r2[1] == doctest::Approx(0.5));

    CHECK_THROWS_AS(reduced_pmf(uni, IntervalPartition::make({0.0, 0.5})),
                    PartitionOutOfRange);

    auto pmf = DiscretePmf::make({0.25, 0.25, 0.25, 0.25});
    auto rp = reduced_pmf(pmf, IntervalPartition::make({0.0, 2.0, 4.0}));
    CHECK(rp[0] == doctest::Approx(0.5));
    CHECK_THROWS_AS(reduced_pmf(pmf, IntervalPartition::make({0.0, 1.5, 4.0})),
                    PartitionOutOfRange);
    CHECK_THROWS_AS(IntervalPartition::make({0.0, 0.5, 0.5, 1.0}), PartitionOutOfRange);
}

TEST_CASE("prefix sum table telescopes to zero") {
    RngStream rng(3, 0);
    auto p = random_positive_pmf(9, rng);
    auto q = random_positive_pmf(9, rng);
    auto t = PrefixSumTable::of_difference(p, q);
    CHECK(t.s.front() == 0.0);
    CHECK(std::fabs(t.s.back()) < 1e-12);
}

TEST_CASE("ak_distance_discrete on pinned instances") {
    auto p = DiscretePmf::make({0.5, 0.5, 0.0, 0.0});
    auto q = DiscretePmf::make({0.0, 0.0, 0.5, 0.5});
    CHECK(ak_distance_discrete(p, p, 3) == 0.0);
    CHECK(ak_distance_discrete(p, q, 2) == doctest::Approx(2.0));

    // Brute force first: prefix sums of p - q are (0.3, 0, 0.3, 0), and the
    // best single split yields 0.6.
    auto a = DiscretePmf::make({0.4, 0.1, 0.4, 0.1});
    auto b = DiscretePmf::make({0.1, 0.4, 0.1, 0.4});
    double oracle = ak_distance_bruteforce(a, b, 2);
    CHECK(oracle == doctest::Approx(0.6));
    CHECK(ak_distance_discrete(a, b, 2) == doctest::Approx(oracle));

    CHECK_THROWS_AS(ak_distance_discrete(p, DiscretePmf::make({1.0}), 2), SupportMismatch);
}

TEST_CASE("ak_distance_bruteforce edge cases") {
    RngStream rng(17, 0);
    auto p = random_dyadic_pmf(8, rng);
    auto q = random_dyadic_pmf(8, rng);
    CHECK(ak_distance_bruteforce(p, q, 8) == l1_distance(p, q));
    CHECK(ak_distance_bruteforce(p, q, 1) == 0.0);

    std::vector<double> big(17, 1.0 / 17.0);
    big[0] += 1.0 - 17.0 * (1.0 / 17.0);
    CHECK_THROWS_AS(ak_distance_bruteforce(DiscretePmf::make(big), DiscretePmf::make(big), 2),
                    TooLarge);
}

TEST_CASE("DP equals brute force exactly on dyadic instances") {
    RngStream rng(100, 0);
    for (int rep = 0; rep < 300; ++rep) {
        std::size_t n = 2 + rng.uniform_below(11); // up to 12
        int k = 1 + static_cast<int>(rng.uniform_below(4));
        auto p = random_dyadic_pmf(n, rng);
        auto q = random_dyadic_pmf(n, rng);
        double dp = ak_distance_discrete(p, q, k);
        double bf = ak_distance_bruteforce(p, q, k);
        REQUIRE(dp == bf);
    }
}

TEST_CASE("DP matches brute force within float noise on generic instances") {
    RngStream rng(101, 0);
    for (int rep = 0; rep < 200; ++rep) {
        std::size_t n = 2 + rng.uniform_below(11);
        int k = 1 + static_cast<int>(rng.uniform_below(4));
        auto p = random_positive_pmf(n, rng);
        auto q = random_positive_pmf(n, rng);
        REQUIRE(ak_distance_discrete(p, q, k) ==
                doctest::Approx(ak_distance_bruteforce(p, q, k)).epsilon(1e-12));
    }
}

TEST_CASE("DP cut reconstruction attains the reported value") {
    RngStream rng(102, 0);
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t n = 3 + rng.uniform_below(10);
        int k = 2 + static_cast<int>(rng.uniform_below(3));
        auto p = random_positive_pmf(n, rng);
        auto q = random_positive_pmf(n, rng);
        auto res = ak_distance_discrete_with_cuts(p, q, k);
        // Evaluate the partition the cuts describe.
        double val = 0.0;
        std::size_t start = 0;
        auto cuts = res.cuts;
        cuts.push_back(n);
        for (std::size_t c : cuts) {
            double pm = 0.0, qm = 0.0;
            for (std::size_t i = start; i < c; ++i) {
                pm += p[i];
                qm += q[i];
            }
            val += std::fabs(pm - qm);
            start = c;
        }
        REQUIRE(val == doctest::Approx(res.value).epsilon(1e-12));
        REQUIRE(res.value ==
                doctest::Approx(ak_distance_discrete(p, q, k)).epsilon(1e-12));
    }
}

TEST_CASE("l1 and l2 distances") {
    auto p = DiscretePmf::make({1.0, 0.0});
    auto q = DiscretePmf::make({0.0, 1.0});
    CHECK(l1_distance(p, q) == doctest::Approx(2.0));
    CHECK(l2_distance(p, q) == doctest::Approx(std::sqrt(2.0)));
    CHECK(l1_distance(p, p) == 0.0);

    auto u = make_pwc({0, 1}, {1});
    auto h = make_pwc({0, 0.5, 1}, {2, 0});
    CHECK(l1_distance(u, h) == doctest::Approx(1.0));
    CHECK(l2_distance(u, h) == doctest::Approx(1.0));
}

TEST_CASE("A_k is monotone in k, symmetric, bounded by L1 with equality at k=n") {
    RngStream rng(103, 0);
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t n = 3 + rng.uniform_below(8);
        auto p = random_positive_pmf(n, rng);
        auto q = random_positive_pmf(n, rng);
        double l1 = l1_distance(p, q);
        double prev = 0.0;
        for (int k = 1; k <= static_cast<int>(n); ++k) {
            double v = ak_distance_discrete(p, q, k);
            REQUIRE(v >= prev - 1e-12);
            REQUIRE(v <= l1 + 1e-12);
            REQUIRE(v == doctest::Approx(ak_distance_discrete(q, p, k)).epsilon(1e-12));
            prev = v;
        }
        REQUIRE(ak_distance_discrete(p, q, static_cast<int>(n)) ==
                doctest::Approx(l1).epsilon(1e-12));
    }
}

TEST_CASE("A_k satisfies the triangle inequality on random triples") {
    RngStream rng(104, 0);
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t n = 3 + rng.uniform_below(8);
        int k = 1 + static_cast<int>(rng.uniform_below(4));
        auto p = random_positive_pmf(n, rng);
        auto q = random_positive_pmf(n, rng);
        auto r = random_positive_pmf(n, rng);
        double pq = ak_distance_discrete(p, q, k);
        double qr = ak_distance_discrete(q, r, k);
        double pr = ak_distance_discrete(p, r, k);
        REQUIRE(pr <= pq + qr + 1e-12);
    }
}

TEST_CASE("pwc A_k: identical densities and oracle equivalence on sign runs") {
    auto u = make_pwc({0, 1}, {1});
    CHECK(ak_distance_pwc(u, u, 3) == 0.0);

    RngStream rng(105, 0);
    int done = 0;
    while (done < 200) {
        auto p = random_density(1 + static_cast<int>(rng.uniform_below(7)), rng);
        auto q = random_density(1 + static_cast<int>(rng.uniform_below(7)), rng);
        SignRunReduction red = sign_run_reduction(p, q);
        if (red.p_masses.size() > 12) continue;
        ++done;
        int k = 1 + static_cast<int>(rng.uniform_below(4));
        double viadp = ak_distance_pwc(p, q, k);
        double viabrute = ak_distance_bruteforce(DiscretePmf::make(red.p_masses),
                                                 DiscretePmf::make(red.q_masses), k);
        REQUIRE(viadp == doctest::Approx(viabrute).epsilon(1e-12));
    }
}

TEST_CASE("pwc A_k cut points attain the value") {
    RngStream rng(106, 0);
    for (int rep = 0; rep < 50; ++rep) {
        auto p = random_density(1 + static_cast<int>(rng.uniform_below(7)), rng);
        auto q = random_density(1 + static_cast<int>(rng.uniform_below(7)), rng);
        int k = 2 + static_cast<int>(rng.uniform_below(3));
        auto res = ak_distance_pwc_with_cuts(p, q, k);
        std::vector<double> cuts{0.0};
        for (double c : res.cut_points) cuts.push_back(c);
        cuts.push_back(1.0);
        double val = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            double pm = p.cdf(cuts[i + 1]) - p.cdf(cuts[i]);
            double qm = q.cdf(cuts[i + 1]) - q.cdf(cuts[i]);
            val += std::fabs(pm - qm);
        }
        REQUIRE(val == doctest::Approx(res.value).epsilon(1e-9));
    }
}

TEST_CASE("A_k is invariant under strictly increasing piecewise-linear maps") {
    RngStream rng(107, 0);
    for (int rep = 0; rep < 50; ++rep) {
        auto p = random_density(1 + static_cast<int>(rng.uniform_below(6)), rng);
        auto q = random_density(1 + static_cast<int>(rng.uniform_below(6)), rng);

        // Relabel both through the same random increasing map of [0,1]:
        // push every breakpoint through T and rescale heights by the local
        // slope, which preserves all interval masses.
        auto warp = [](const PiecewiseConstantDensity& d, const std::vector<double>& knots,
                       const std::vector<double>& images) {
            auto t_of = [&](double x) {
                auto it = std::upper_bound(knots.begin(), knots.end(), x);
                std::size_t i = static_cast<std::size_t>(it - knots.begin());
                if (i == 0) return images.front();
                if (i >= knots.size()) return images.back();
                double f = (x - knots[i - 1]) / (knots[i] - knots[i - 1]);
                return images[i - 1] + f * (images[i] - images[i - 1]);
            };
            // Refine the grid at the map's knots so every cell has a single
            // slope; per-cell masses are then carried over exactly.
            std::vector<double> obp = merge_breakpoints(d.breakpoints(), knots);
            std::vector<double> bp;
            std::vector<double> h;
            for (double x : obp) bp.push_back(t_of(x));
            std::size_t piece = 0;
            for (std::size_t i = 0; i + 1 < obp.size(); ++i) {
                while (piece + 1 < d.breakpoints().size() &&
                       d.breakpoints()[piece + 1] <= obp[i])
                    ++piece;
                double mass = d.heights()[piece] * (obp[i + 1] - obp[i]);
                h.push_back(mass / (bp[i + 1] - bp[i]));
            }
            bp.front() = 0.0;
            bp.back() = 1.0;
            return make_pwc(bp, h);
        };

        std::vector<double> knots{0.0, 0.25 + 0.5 * rng.uniform(), 1.0};
        std::vector<double> images{0.0, 0.25 + 0.5 * rng.uniform(), 1.0};
        auto tp = warp(p, knots, images);
        auto tq = warp(q, knots, images);
        for (int k = 1; k <= 4; ++k)
            REQUIRE(ak_distance_pwc(p, q, k) ==
                    doctest::Approx(ak_distance_pwc(tp, tq, k)).epsilon(1e-9));
    }
}

TEST_CASE("scale_sensitive_l2 pinned values and bounds") {
    auto p = DiscretePmf::make({1.0, 0.0, 0.0, 0.0});
    auto q = DiscretePmf::make({0.0, 0.0, 0.0, 1.0});
    CHECK(scale_sensitive_l2(p, p, 2) == doctest::Approx(0.0));
    // k = n forces singleton intervals: two bins at discrepancy 1, width 1/4.
    CHECK(scale_sensitive_l2(p, q, 4) == doctest::Approx(2.0 * std::pow(4.0, 0.125)));

    std::vector<double> big(17, 1.0 / 17.0);
    big[0] += 1.0 - 17.0 * (1.0 / 17.0);
    CHECK_THROWS_AS(scale_sensitive_l2(DiscretePmf::make(big), DiscretePmf::make(big), 2),
                    TooLarge);
}

TEST_CASE("scale_sensitive_l2 dominates A_k^2 / (2k)^{7/8}") {
    RngStream rng(108, 0);
    for (int rep = 0; rep < 200; ++rep) {
        std::size_t n = 4 + rng.uniform_below(13); // 4..16
        int k = 1 + static_cast<int>(rng.uniform_below(4));
        if (static_cast<std::size_t>(k) > n) k = static_cast<int>(n);
        auto p = random_positive_pmf(n, rng);
        auto q = random_positive_pmf(n, rng);
        double ss = scale_sensitive_l2(p, q, k);
        double ak = ak_distance_discrete(p, q, k);
        REQUIRE(ss >= ak * ak / std::pow(2.0 * k, 7.0 / 8.0) - 1e-12);
    }
}

TEST_CASE("dyadic level sum upper-bounds the scale-sensitive distance") {
    RngStream rng(109, 0);
    for (int rep = 0; rep < 200; ++rep) {
        int k = rng.uniform() < 0.5 ? 2 : 4;
        std::size_t n = static_cast<std::size_t>(k) * (rng.uniform() < 0.5 ? 4 : 2);
        if (n > 16) continue;
        auto p = random_positive_pmf(n, rng);
        auto q = random_positive_pmf(n, rng);
        double ss = scale_sensitive_l2(p, q, k);
        double dy = dyadic_level_discrepancy_sum(p, q, k);
        REQUIRE(ss <= 1e8 * dy + 1e-15);
    }
    CHECK_THROWS_AS(dyadic_level_discrepancy_sum(DiscretePmf::make({0.5, 0.25, 0.25}),
                                                 DiscretePmf::make({0.5, 0.25, 0.25}), 2),
                    ConfigError);
}
