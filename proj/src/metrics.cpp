#include "akct/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace akct {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> heights_on_grid(const PiecewiseConstantDensity& d,
                                    const std::vector<double>& grid) {
    std::vector<double> out(grid.size() - 1);
    std::size_t j = 0;
    const auto& bp = d.breakpoints();
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        while (j + 1 < bp.size() && bp[j + 1] <= grid[i]) ++j;
        out[i] = d.heights()[j];
    }
    return out;
}

// L1 along a prefix-sum table, summed left to right; this is what a
// partition into singletons attains.
double l1_from_prefix(const std::vector<double>& s) {
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < s.size(); ++j) total += std::fabs(s[j + 1] - s[j]);
    return total;
}

// Core DP over prefix sums: best over partitions of [0, n] into at most k
// intervals of sum |s[j_t] - s[j_{t-1}]|.  The max over exactly t intervals
// is nondecreasing in t (splitting an interval never hurts, by the triangle
// inequality), so the value for "at most k" is the exactly-min(k, n) value.
double ak_dp(const std::vector<double>& s, int k) {
    std::size_t n = s.size() - 1;
    if (n == 0) return 0.0;
    std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 1)), n);
    if (kk == n) return l1_from_prefix(s);

    // f[t][j] = max_{i<j} f[t-1][i] + |s_j - s_i|
    //         = max( max_i(f[t-1][i] + s_i) - s_j,  max_i(f[t-1][i] - s_i) + s_j ),
    // with the running maxima updated as j sweeps left to right.
    std::vector<double> prev(n + 1), cur(n + 1);
    prev[0] = kNegInf;
    for (std::size_t j = 1; j <= n; ++j) prev[j] = std::fabs(s[j] - s[0]);
    if (kk == 1) return prev[n];

    for (std::size_t t = 2; t <= kk; ++t) {
        double max_plus = kNegInf;  // f[t-1][i] + s_i
        double max_minus = kNegInf; // f[t-1][i] - s_i
        std::fill(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(t), kNegInf);
        for (std::size_t j = t; j <= n; ++j) {
            double fi = prev[j - 1];
            if (fi > kNegInf) {
                max_plus = std::max(max_plus, fi + s[j - 1]);
                max_minus = std::max(max_minus, fi - s[j - 1]);
            }
            cur[j] = std::max(max_plus - s[j], max_minus + s[j]);
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

// Same DP with parent tracking for cut reconstruction.
AkDiscreteResult ak_dp_with_cuts(const std::vector<double>& s, int k) {
    std::size_t n = s.size() - 1;
    AkDiscreteResult res{0.0, {}};
    if (n == 0) return res;
    std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 1)), n);

    std::vector<std::vector<double>> f(kk + 1, std::vector<double>(n + 1, kNegInf));
    std::vector<std::vector<std::uint32_t>> parent(kk + 1,
                                                   std::vector<std::uint32_t>(n + 1, 0));
    for (std::size_t j = 1; j <= n; ++j) f[1][j] = std::fabs(s[j] - s[0]);
    for (std::size_t t = 2; t <= kk; ++t) {
        double max_plus = kNegInf, max_minus = kNegInf;
        std::uint32_t arg_plus = 0, arg_minus = 0;
        for (std::size_t j = t; j <= n; ++j) {
            double fi = f[t - 1][j - 1];
            if (fi > kNegInf) {
                if (fi + s[j - 1] > max_plus) {
                    max_plus = fi + s[j - 1];
                    arg_plus = static_cast<std::uint32_t>(j - 1);
                }
                if (fi - s[j - 1] > max_minus) {
                    max_minus = fi - s[j - 1];
                    arg_minus = static_cast<std::uint32_t>(j - 1);
                }
            }
            double a = max_plus - s[j];
            double b = max_minus + s[j];
            if (a >= b) {
                f[t][j] = a;
                parent[t][j] = arg_plus;
            } else {
                f[t][j] = b;
                parent[t][j] = arg_minus;
            }
        }
    }
    res.value = f[kk][n];
    std::size_t j = n;
    for (std::size_t t = kk; t > 1; --t) {
        j = parent[t][j];
        res.cuts.push_back(j);
    }
    std::reverse(res.cuts.begin(), res.cuts.end());
    return res;
}

std::vector<double> prefix_of_difference(const std::vector<double>& p,
                                         const std::vector<double>& q) {
    std::vector<double> s(p.size() + 1);
    s[0] = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s[i + 1] = s[i] + (p[i] - q[i]);
    return s;
}

void check_same_support(const DiscretePmf& p, const DiscretePmf& q) {
    if (p.size() != q.size())
        throw SupportMismatch("support sizes differ: " + std::to_string(p.size()) + " vs " +
                              std::to_string(q.size()));
}

} // namespace

IntervalPartition IntervalPartition::make(std::vector<double> cuts) {
    if (cuts.size() < 2) throw PartitionOutOfRange("partition: need at least 2 cut points");
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (!(cuts[i] < cuts[i + 1]))
            throw PartitionOutOfRange("partition: cuts not strictly ascending at index " +
                                      std::to_string(i + 1));
    }
    IntervalPartition part;
    part.cuts = std::move(cuts);
    return part;
}

IntervalPartition uniform_bin_partition(std::size_t n) {
    std::vector<double> cuts(n + 1);
    for (std::size_t i = 0; i <= n; ++i) cuts[i] = static_cast<double>(i);
    return IntervalPartition::make(std::move(cuts));
}

PrefixSumTable PrefixSumTable::of_difference(const DiscretePmf& p, const DiscretePmf& q) {
    check_same_support(p, q);
    PrefixSumTable t;
    t.s = prefix_of_difference(p.masses(), q.masses());
    return t;
}

DiscretePmf reduced_pmf(const PiecewiseConstantDensity& d, const IntervalPartition& part) {
    if (part.cuts.front() != 0.0 || part.cuts.back() != 1.0)
        throw PartitionOutOfRange("partition: must cover [0, 1], got [" +
                                  std::to_string(part.cuts.front()) + ", " +
                                  std::to_string(part.cuts.back()) + "]");
    std::vector<double> masses(part.interval_count());
    double prev = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        double next = d.cdf(part.cuts[i + 1]);
        masses[i] = std::max(0.0, next - prev);
        prev = next;
    }
    return DiscretePmf::make(std::move(masses));
}

DiscretePmf reduced_pmf(const DiscretePmf& d, const IntervalPartition& part) {
    std::size_t n = d.size();
    if (part.cuts.front() != 0.0 || part.cuts.back() != static_cast<double>(n))
        throw PartitionOutOfRange("partition: must cover bins [0, " + std::to_string(n) + "]");
    std::vector<double> masses(part.interval_count(), 0.0);
    for (std::size_t i = 0; i < masses.size(); ++i) {
        double lo = part.cuts[i];
        double hi = part.cuts[i + 1];
        if (lo != std::floor(lo) || hi != std::floor(hi))
            throw PartitionOutOfRange("partition: discrete cuts must be integral");
        for (std::size_t b = static_cast<std::size_t>(lo); b < static_cast<std::size_t>(hi);
             ++b)
            masses[i] += d[b];
    }
    return DiscretePmf::make(std::move(masses));
}

double ak_distance_discrete(const DiscretePmf& p, const DiscretePmf& q, int k) {
    check_same_support(p, q);
    return ak_dp(prefix_of_difference(p.masses(), q.masses()), k);
}

AkDiscreteResult ak_distance_discrete_with_cuts(const DiscretePmf& p, const DiscretePmf& q,
                                                int k) {
    check_same_support(p, q);
    return ak_dp_with_cuts(prefix_of_difference(p.masses(), q.masses()), k);
}

namespace {

AkDiscreteResult brute_force_impl(const DiscretePmf& p, const DiscretePmf& q, int k) {
    check_same_support(p, q);
    std::size_t n = p.size();
    if (n > 16) throw TooLarge("ak_distance_bruteforce: n = " + std::to_string(n) + " > 16");
    unsigned slots = static_cast<unsigned>(n - 1);
    std::uint32_t max_cuts = k >= 1 ? static_cast<std::uint32_t>(k - 1) : 0;

    AkDiscreteResult best{-1.0, {}};
    std::uint32_t best_mask = 0;
    for (std::uint32_t mask = 0; mask < (1u << slots); ++mask) {
        if (static_cast<std::uint32_t>(std::popcount(mask)) > max_cuts) continue;
        double value = 0.0;
        double psum = 0.0, qsum = 0.0;
        for (std::size_t pos = 0; pos < n; ++pos) {
            psum += p[pos];
            qsum += q[pos];
            bool boundary = (pos + 1 == n) || (mask >> pos) & 1u;
            if (boundary) {
                value += std::fabs(psum - qsum);
                psum = 0.0;
                qsum = 0.0;
            }
        }
        if (value > best.value) {
            best.value = value;
            best_mask = mask;
        }
    }
    for (unsigned pos = 0; pos < slots; ++pos)
        if ((best_mask >> pos) & 1u) best.cuts.push_back(pos + 1);
    return best;
}

} // namespace

double ak_distance_bruteforce(const DiscretePmf& p, const DiscretePmf& q, int k) {
    return brute_force_impl(p, q, k).value;
}

AkDiscreteResult ak_distance_bruteforce_with_cuts(const DiscretePmf& p, const DiscretePmf& q,
                                                  int k) {
    return brute_force_impl(p, q, k);
}

SignRunReduction sign_run_reduction(const PiecewiseConstantDensity& p,
                                    const PiecewiseConstantDensity& q) {
    std::vector<double> grid = merge_breakpoints(p.breakpoints(), q.breakpoints());
    std::vector<double> hp = heights_on_grid(p, grid);
    std::vector<double> hq = heights_on_grid(q, grid);

    // An optimal partition never needs a cut strictly inside a run on which
    // p - q keeps one sign: moving such a cut transfers mass t of constant
    // sign between the two adjacent intervals, and |a - t| + |b + t| is
    // convex in t, so its maximum over the feasible range is attained when
    // the cut sits on a run boundary.  Induction over interior cuts reduces
    // any partition to one supported on run boundaries, so the continuous
    // A_k equals the discrete A_k of the per-run mass vectors.
    SignRunReduction red;
    red.boundaries.push_back(0.0);
    int run_sign = 0;
    double pm = 0.0, qm = 0.0;
    bool open = false;
    for (std::size_t i = 0; i < hp.size(); ++i) {
        double w = grid[i + 1] - grid[i];
        double dp = hp[i] * w;
        double dq = hq[i] * w;
        double delta = dp - dq;
        int sign = delta > 0.0 ? 1 : (delta < 0.0 ? -1 : 0);
        if (open && sign != 0 && run_sign != 0 && sign != run_sign) {
            red.p_masses.push_back(pm);
            red.q_masses.push_back(qm);
            red.boundaries.push_back(grid[i]);
            pm = qm = 0.0;
            run_sign = 0;
        }
        pm += dp;
        qm += dq;
        if (sign != 0 && run_sign == 0) run_sign = sign;
        open = true;
    }
    red.p_masses.push_back(pm);
    red.q_masses.push_back(qm);
    red.boundaries.push_back(1.0);
    return red;
}

double ak_distance_pwc(const PiecewiseConstantDensity& p, const PiecewiseConstantDensity& q,
                       int k) {
    SignRunReduction red = sign_run_reduction(p, q);
    return ak_dp(prefix_of_difference(red.p_masses, red.q_masses), k);
}

AkPwcResult ak_distance_pwc_with_cuts(const PiecewiseConstantDensity& p,
                                      const PiecewiseConstantDensity& q, int k) {
    SignRunReduction red = sign_run_reduction(p, q);
    AkDiscreteResult inner =
        ak_dp_with_cuts(prefix_of_difference(red.p_masses, red.q_masses), k);
    AkPwcResult out{inner.value, {}};
    for (std::size_t c : inner.cuts) out.cut_points.push_back(red.boundaries[c]);
    return out;
}

double l1_distance(const DiscretePmf& p, const DiscretePmf& q) {
    check_same_support(p, q);
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += std::fabs(p[i] - q[i]);
    return total;
}

double l2_distance(const DiscretePmf& p, const DiscretePmf& q) {
    check_same_support(p, q);
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double d = p[i] - q[i];
        total += d * d;
    }
    return std::sqrt(total);
}

double l1_distance(const PiecewiseConstantDensity& p, const PiecewiseConstantDensity& q) {
    std::vector<double> grid = merge_breakpoints(p.breakpoints(), q.breakpoints());
    std::vector<double> hp = heights_on_grid(p, grid);
    std::vector<double> hq = heights_on_grid(q, grid);
    double total = 0.0;
    for (std::size_t i = 0; i < hp.size(); ++i)
        total += std::fabs(hp[i] - hq[i]) * (grid[i + 1] - grid[i]);
    return total;
}

double l2_distance(const PiecewiseConstantDensity& p, const PiecewiseConstantDensity& q) {
    std::vector<double> grid = merge_breakpoints(p.breakpoints(), q.breakpoints());
    std::vector<double> hp = heights_on_grid(p, grid);
    std::vector<double> hq = heights_on_grid(q, grid);
    double total = 0.0;
    for (std::size_t i = 0; i < hp.size(); ++i) {
        double d = hp[i] - hq[i];
        total += d * d * (grid[i + 1] - grid[i]);
    }
    return std::sqrt(total);
}

double scale_sensitive_l2(const DiscretePmf& p, const DiscretePmf& q, int k) {
    check_same_support(p, q);
    std::size_t n = p.size();
    if (n > 16) throw TooLarge("scale_sensitive_l2: n = " + std::to_string(n) + " > 16");
    if (k < 1) throw ConfigError("scale_sensitive_l2: k must be positive");
    std::size_t max_bins = n / static_cast<std::size_t>(k);
    if (max_bins == 0)
        throw ConfigError("scale_sensitive_l2: no partition into intervals of width <= 1/k");

    // 1 / width^{1/8} for every admissible interval length.
    std::vector<double> inv_width_pow(max_bins + 1, 0.0);
    for (std::size_t b = 1; b <= max_bins; ++b)
        inv_width_pow[b] = 1.0 / std::pow(static_cast<double>(b) / static_cast<double>(n), 0.125);

    unsigned slots = static_cast<unsigned>(n - 1);
    double best = -1.0;
    for (std::uint32_t mask = 0; mask < (1u << slots); ++mask) {
        double value = 0.0;
        double psum = 0.0, qsum = 0.0;
        std::size_t len = 0;
        bool ok = true;
        for (std::size_t pos = 0; pos < n; ++pos) {
            psum += p[pos];
            qsum += q[pos];
            ++len;
            if (len > max_bins) {
                ok = false;
                break;
            }
            bool boundary = (pos + 1 == n) || (mask >> pos) & 1u;
            if (boundary) {
                double discr = psum - qsum;
                value += discr * discr * inv_width_pow[len];
                psum = qsum = 0.0;
                len = 0;
            }
        }
        if (ok && value > best) best = value;
    }
    return best;
}

double dyadic_level_discrepancy_sum(const DiscretePmf& p, const DiscretePmf& q, int k) {
    check_same_support(p, q);
    std::size_t n = p.size();
    if (k < 1 || n % static_cast<std::size_t>(k) != 0)
        throw ConfigError("dyadic sum: support size must be k * 2^j0");
    std::size_t ratio = n / static_cast<std::size_t>(k);
    if (ratio < 2 || (ratio & (ratio - 1)) != 0)
        throw ConfigError("dyadic sum: support size must be k * 2^j0 with j0 >= 1");

    double total = 0.0;
    for (std::size_t size = ratio; size >= 2; size /= 2) {
        double inv_width_pow =
            1.0 / std::pow(static_cast<double>(size) / static_cast<double>(n), 0.125);
        for (std::size_t start = 0; start < n; start += size) {
            double discr = 0.0;
            for (std::size_t b = start; b < start + size; ++b) discr += p[b] - q[b];
            total += discr * discr * inv_width_pow;
        }
    }
    return total;
}

} // namespace akct
