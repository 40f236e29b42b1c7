#include "akct/dist.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace akct {

namespace {

// Compensated (Kahan) accumulator for mass sums.
struct KahanSum {
    double s = 0.0;
    double c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

} // namespace

PiecewiseConstantDensity PiecewiseConstantDensity::make(std::vector<double> breakpoints,
                                                        std::vector<double> heights) {
    if (breakpoints.size() < 2)
        throw NonAscendingBreakpoints("breakpoints: need at least 2 points");
    if (heights.size() + 1 != breakpoints.size())
        throw DimensionMismatch("heights: expected " + std::to_string(breakpoints.size() - 1) +
                                " entries, got " + std::to_string(heights.size()));
    if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0)
        throw NonAscendingBreakpoints("breakpoints: domain must be [0, 1], got [" +
                                      std::to_string(breakpoints.front()) + ", " +
                                      std::to_string(breakpoints.back()) + "]");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw NonAscendingBreakpoints("breakpoints: not strictly ascending at index " +
                                          std::to_string(i + 1));
    }
    for (std::size_t i = 0; i < heights.size(); ++i) {
        if (!(heights[i] >= 0.0))
            throw NegativeHeight("heights: negative at index " + std::to_string(i));
    }

    PiecewiseConstantDensity d;
    d.cum_.resize(heights.size() + 1);
    KahanSum mass;
    d.cum_[0] = 0.0;
    for (std::size_t i = 0; i < heights.size(); ++i) {
        mass.add(heights[i] * (breakpoints[i + 1] - breakpoints[i]));
        d.cum_[i + 1] = mass.value();
    }
    if (std::fabs(mass.value() - 1.0) > kMassTolerance)
        throw MassNotOne(mass.value(),
                         "density: total mass " + std::to_string(mass.value()) + " is not 1");
    d.cum_.back() = 1.0;
    d.breakpoints_ = std::move(breakpoints);
    d.heights_ = std::move(heights);
    return d;
}

double PiecewiseConstantDensity::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    double v = cum_[i] + (x - breakpoints_[i]) * heights_[i];
    return std::min(v, 1.0);
}

double PiecewiseConstantDensity::inverse_cdf(double u) const {
    if (u <= 0.0) u = 0.0;
    // First piece whose cumulative mass exceeds u; pieces of zero height
    // contribute no cumulative growth and are skipped automatically.
    auto it = std::upper_bound(cum_.begin() + 1, cum_.end(), u);
    if (it == cum_.end()) it = cum_.end() - 1;
    std::size_t i = static_cast<std::size_t>(it - cum_.begin()) - 1;
    if (heights_[i] == 0.0) {
        // u landed on a cumulative plateau (possible only at rounding
        // boundaries); snap to the right edge of the last positive piece.
        while (i > 0 && heights_[i] == 0.0) --i;
        return breakpoints_[i + 1];
    }
    double x = breakpoints_[i] + (u - cum_[i]) / heights_[i];
    return std::clamp(x, breakpoints_[i], breakpoints_[i + 1]);
}

DiscretePmf DiscretePmf::make(std::vector<double> masses) {
    if (masses.empty()) throw DimensionMismatch("pmf: empty mass vector");
    KahanSum total;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (!(masses[i] >= 0.0))
            throw NegativeHeight("pmf: negative mass at index " + std::to_string(i));
        total.add(masses[i]);
    }
    if (std::fabs(total.value() - 1.0) > kMassTolerance)
        throw MassNotOne(total.value(),
                         "pmf: total mass " + std::to_string(total.value()) + " is not 1");
    DiscretePmf p;
    p.masses_ = std::move(masses);
    return p;
}

PiecewiseConstantDensity make_pwc(std::vector<double> breakpoints,
                                  std::vector<double> heights) {
    return PiecewiseConstantDensity::make(std::move(breakpoints), std::move(heights));
}

PiecewiseConstantDensity uniform_density() { return make_pwc({0.0, 1.0}, {1.0}); }

std::vector<double> merge_breakpoints(const std::vector<double>& a,
                                      const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

namespace {

// Heights of d on each cell of a refined grid that contains all of d's
// breakpoints.
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

} // namespace

PiecewiseConstantDensity mixture_half(const PiecewiseConstantDensity& p,
                                      const PiecewiseConstantDensity& q) {
    std::vector<double> grid = merge_breakpoints(p.breakpoints(), q.breakpoints());
    std::vector<double> hp = heights_on_grid(p, grid);
    std::vector<double> hq = heights_on_grid(q, grid);
    std::vector<double> h(hp.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = 0.5 * (hp[i] + hq[i]);
    return PiecewiseConstantDensity::make(std::move(grid), std::move(h));
}

std::pair<PiecewiseConstantDensity, PiecewiseConstantDensity>
flatten_pair(const PiecewiseConstantDensity& p, const PiecewiseConstantDensity& q) {
    std::vector<double> grid = merge_breakpoints(p.breakpoints(), q.breakpoints());
    std::vector<double> hp = heights_on_grid(p, grid);
    std::vector<double> hq = heights_on_grid(q, grid);

    // Image breakpoints are the cumulative masses of the mixture; cells
    // where the mixture vanishes collapse to a point and are dropped.
    std::vector<double> out_bp{0.0};
    std::vector<double> out_hp;
    std::vector<double> out_hq;
    KahanSum mass;
    for (std::size_t i = 0; i < hp.size(); ++i) {
        double hm = 0.5 * (hp[i] + hq[i]);
        if (hm <= 0.0) continue;
        mass.add(hm * (grid[i + 1] - grid[i]));
        double y = std::min(mass.value(), 1.0);
        if (!(y > out_bp.back())) continue; // cell mass below double resolution
        double ph = hp[i] / hm;             // = 2 hp / (hp + hq), in [0, 2]
        out_bp.push_back(y);
        out_hp.push_back(ph);
        out_hq.push_back(2.0 - ph);         // makes p' + q' == 2 exact per piece
    }
    if (out_bp.size() < 2)
        throw DegenerateSupport("flatten_pair: mixture has no mass");
    out_bp.back() = 1.0;

    std::vector<double> bp_copy = out_bp;
    auto fp = PiecewiseConstantDensity::make(std::move(out_bp), std::move(out_hp));
    auto fq = PiecewiseConstantDensity::make(std::move(bp_copy), std::move(out_hq));
    return {std::move(fp), std::move(fq)};
}

} // namespace akct
