#include "akct/instances.hpp"

#include <algorithm>
#include <cmath>

#include "akct/metrics.hpp"

namespace akct {

namespace {

void check_regime_params(int k, double eps) {
    if (k < 1) throw ConfigError("hard instance: k must be positive");
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("hard instance: eps must be in (0, 1]");
}

double certify(const InstancePair& pair, double expected) {
    double got = ak_distance_pwc(pair.p, pair.q, pair.k_certified);
    if (std::fabs(got - expected) > 1e-9)
        throw Error("hard instance: oracle distance " + std::to_string(got) +
                    " deviates from expected " + std::to_string(expected));
    return got;
}

struct PwcBuilder {
    std::vector<double> bp{0.0};
    std::vector<double> h;
    void piece(double end, double height) {
        if (end <= bp.back()) return; // skip degenerate widths
        bp.push_back(end);
        h.push_back(height);
    }
    PiecewiseConstantDensity build() && {
        bp.back() = 1.0;
        return PiecewiseConstantDensity::make(std::move(bp), std::move(h));
    }
};

} // namespace

InstancePair regime_a_pair(int k, double eps) {
    check_regime_params(k, eps);
    double kd = static_cast<double>(k);
    double w3 = eps / (3.0 * kd);

    // Segment heights are scale-free: a flank of mass eps/(2k) on width
    // eps/(3k) has height 3/2, the middle has height 3, shared mass 1.
    PwcBuilder p, q;
    for (int i = 0; i < k; ++i) {
        double start = p.bp.back();
        double bucket_end = i + 1 == k ? 1.0 : static_cast<double>(i + 1) / kd;
        double b3 = start + 3.0 * w3;
        if (b3 > bucket_end) b3 = bucket_end;
        p.piece(start + w3, 1.5);
        q.piece(start + w3, 0.0);
        p.piece(start + 2.0 * w3, 0.0);
        q.piece(start + 2.0 * w3, 3.0);
        p.piece(b3, 1.5);
        q.piece(b3, 0.0);
        p.piece(bucket_end, 1.0);
        q.piece(bucket_end, 1.0);
    }

    InstancePair pair;
    pair.p = std::move(p).build();
    pair.q = std::move(q).build();
    pair.identical = false;
    pair.k_certified = 2 * k + 1;
    pair.ak_value = certify(pair, 2.0 * eps);
    pair.provenance = {"regimeA", k, eps, 0, "A_{2k+1} = 2*eps"};
    return pair;
}

InstancePair regime_b_pair(int k, double eps, bool x_is_null, RngStream& rng) {
    check_regime_params(k, eps);
    double kd = static_cast<double>(k);
    double w3 = eps / (3.0 * kd);
    double x_max = (1.0 - eps) / kd;

    PwcBuilder p, q;
    for (int i = 0; i < k; ++i) {
        double start = p.bp.back();
        double bucket_end = i + 1 == k ? 1.0 : static_cast<double>(i + 1) / kd;
        double x = rng.uniform() * x_max;
        double a = std::min(start + x, bucket_end);
        p.piece(a, 1.0);
        q.piece(a, 1.0);
        if (x_is_null) {
            double mini_end = std::min(a + 3.0 * w3, bucket_end);
            p.piece(mini_end, 1.0);
            q.piece(mini_end, 1.0);
        } else {
            double b3 = std::min(a + 3.0 * w3, bucket_end);
            p.piece(a + w3, 0.0);
            q.piece(a + w3, 1.5);
            p.piece(a + 2.0 * w3, 3.0);
            q.piece(a + 2.0 * w3, 0.0);
            p.piece(b3, 0.0);
            q.piece(b3, 1.5);
        }
        p.piece(bucket_end, 1.0);
        q.piece(bucket_end, 1.0);
    }

    InstancePair pair;
    pair.p = std::move(p).build();
    pair.q = std::move(q).build();
    pair.provenance = {x_is_null ? "regimeB-null" : "regimeB", k, eps, rng.seed(), ""};
    if (x_is_null) {
        pair.identical = true;
        pair.q = pair.p;
    } else {
        pair.identical = false;
        pair.k_certified = 2 * k + 1;
        pair.ak_value = certify(pair, 2.0 * eps);
        pair.provenance.note = "oracle A_{2k+1} = 2*eps";
    }
    return pair;
}

OrderDistribution minibucket_order_distribution(int r) {
    if (r < 0 || r > 4) throw ConfigError("minibucket ordering: r must be in [0, 4]");
    static constexpr std::int64_t fact[5] = {1, 1, 2, 6, 24};

    OrderDistribution out;
    out.r = r;
    std::size_t seqs = std::size_t{1} << r;
    out.structured.assign(seqs, Rational(0));
    out.null.assign(seqs, Rational(1, static_cast<std::int64_t>(seqs)));

    // A draw lands in the three segments with probabilities 1/4, 1/2, 1/4
    // (mixture masses), and the segment fixes its label: P, Q, P.  Sorting
    // groups the draws by segment, so counts (a, b, c) produce the sequence
    // P^a Q^b P^c.
    for (int a = 0; a <= r; ++a) {
        for (int b = 0; a + b <= r; ++b) {
            int c = r - a - b;
            std::int64_t ways = fact[r] / (fact[a] * fact[b] * fact[c]);
            Rational prob(ways, std::int64_t{1} << (2 * a + b + 2 * c));
            std::size_t mask = 0;
            for (int i = 0; i < b; ++i) mask |= std::size_t{1} << (a + i);
            out.structured[mask] += prob;
        }
    }

    Rational tv(0);
    for (std::size_t s = 0; s < seqs; ++s) tv += (out.structured[s] - out.null[s]).abs();
    out.tv = tv * Rational(1, 2);
    return out;
}

PiecewiseConstantDensity random_flat_density(int t, RngStream& rng) {
    if (t < 1) throw ConfigError("random_flat_density: t must be positive");
    for (;;) {
        std::vector<double> bp(static_cast<std::size_t>(t) + 1);
        bp.front() = 0.0;
        bp.back() = 1.0;
        for (int i = 1; i < t; ++i) bp[static_cast<std::size_t>(i)] = rng.uniform();
        std::sort(bp.begin(), bp.end());
        bool distinct = true;
        for (std::size_t i = 0; i + 1 < bp.size(); ++i)
            if (!(bp[i] < bp[i + 1])) distinct = false;
        if (!distinct) continue; // measure-zero collision, redraw

        std::vector<double> mass(static_cast<std::size_t>(t));
        double total = 0.0;
        for (auto& m : mass) {
            m = rng.exponential();
            total += m;
        }
        std::vector<double> h(mass.size());
        for (std::size_t i = 0; i < mass.size(); ++i)
            h[i] = mass[i] / total / (bp[i + 1] - bp[i]);
        return PiecewiseConstantDensity::make(std::move(bp), std::move(h));
    }
}

InstancePair gen_flat_pair(int t, double eps, RngStream& rng) {
    if (t < 1) throw ConfigError("gen_flat_pair: t must be positive");
    if (!(eps > 0.0 && eps < 2.0)) throw ConfigError("gen_flat_pair: eps must be in (0, 2)");

    constexpr int kMaxAttempts = 10000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        // Shared breakpoint grid, independent piece masses.
        std::vector<double> bp(static_cast<std::size_t>(t) + 1);
        bp.front() = 0.0;
        bp.back() = 1.0;
        for (int i = 1; i < t; ++i) bp[static_cast<std::size_t>(i)] = rng.uniform();
        std::sort(bp.begin(), bp.end());
        bool distinct = true;
        for (std::size_t i = 0; i + 1 < bp.size(); ++i)
            if (!(bp[i] < bp[i + 1])) distinct = false;
        if (!distinct) continue;

        auto draw_heights = [&]() {
            std::vector<double> mass(static_cast<std::size_t>(t));
            double total = 0.0;
            for (auto& m : mass) {
                m = rng.exponential();
                total += m;
            }
            std::vector<double> h(mass.size());
            for (std::size_t i = 0; i < mass.size(); ++i)
                h[i] = mass[i] / total / (bp[i + 1] - bp[i]);
            return h;
        };
        PiecewiseConstantDensity p = PiecewiseConstantDensity::make(bp, draw_heights());
        PiecewiseConstantDensity q = PiecewiseConstantDensity::make(bp, draw_heights());

        int k_cert = 2 * t;
        double dist = ak_distance_pwc(p, q, k_cert);
        if (dist >= eps) {
            InstancePair pair;
            pair.p = std::move(p);
            pair.q = std::move(q);
            pair.identical = false;
            pair.k_certified = k_cert;
            pair.ak_value = dist;
            pair.provenance = {"flatpair", t, eps, rng.seed(),
                               "attempt " + std::to_string(attempt)};
            return pair;
        }
    }
    throw GenerationTimeout("gen_flat_pair: no pair with A_{2t} >= " + std::to_string(eps) +
                            " after " + std::to_string(kMaxAttempts) + " attempts");
}

namespace {

std::int64_t ceil_tol(double x) {
    double c = std::ceil(x - 1e-9);
    return c < 1.0 ? 1 : static_cast<std::int64_t>(c);
}

} // namespace

int class_k(const ClassSpec& spec, double eps) {
    if (!(eps > 0.0 && eps < 2.0)) throw ConfigError("class_k: eps must be in (0, 2)");
    std::int64_t k = 0;
    switch (spec.family) {
    case Family::TFlat:
        if (spec.t < 1) throw ConfigError("class_k: t must be positive");
        // A difference of two t-piece densities has at most 2t-1 sign runs.
        k = 2 * static_cast<std::int64_t>(spec.t);
        break;
    case Family::TPiecewiseDegree:
        if (spec.t < 1 || spec.degree < 0) throw ConfigError("class_k: bad t/degree");
        k = 2 * static_cast<std::int64_t>(spec.t) * (spec.degree + 1);
        break;
    case Family::LogConcave:
        k = ceil_tol(std::pow(eps, -0.5));
        break;
    case Family::LogConcaveMixture:
        if (spec.kmix < 1) throw ConfigError("class_k: kmix must be positive");
        k = spec.kmix * ceil_tol(std::pow(eps, -0.5));
        break;
    case Family::TModal:
        if (spec.t < 1 || spec.n < 2) throw ConfigError("class_k: bad t/n");
        k = ceil_tol(static_cast<double>(spec.t) * std::log2(static_cast<double>(spec.n)) /
                     eps);
        break;
    case Family::Mhr:
        if (spec.n < 2) throw ConfigError("class_k: bad n");
        k = ceil_tol(std::log2(static_cast<double>(spec.n) / eps) / eps);
        break;
    }
    if (k > INT32_MAX) throw TooLarge("class_k: k overflows");
    return static_cast<int>(k);
}

} // namespace akct
