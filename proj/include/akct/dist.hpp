#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "akct/errors.hpp"
#include "akct/rng.hpp"

namespace akct {

// Tolerance for unit total mass at construction.
inline constexpr double kMassTolerance = 1e-12;

// A normalized density on [0, 1] given by ascending breakpoints (first 0,
// last 1) and one nonnegative height per piece.  Heights are in mass per
// unit length.  Immutable after construction, so instances are freely
// shareable across threads.
class PiecewiseConstantDensity {
public:
    static PiecewiseConstantDensity make(std::vector<double> breakpoints,
                                         std::vector<double> heights);

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& heights() const { return heights_; }
    std::size_t piece_count() const { return heights_.size(); }

    // Exact piecewise-linear CDF; clamps x into [0, 1].
    double cdf(double x) const;

    // Inverse CDF at u in [0, 1).  Zero-height pieces are skipped by
    // construction; the result always lies in the closed support.
    double inverse_cdf(double u) const;

    double sample(RngStream& rng) const { return inverse_cdf(rng.uniform()); }

    // Cumulative mass strictly before piece i (cumulative_mass(piece_count())
    // is the total, snapped to 1).
    double cumulative_mass(std::size_t i) const { return cum_[i]; }

    bool operator==(const PiecewiseConstantDensity& other) const {
        return breakpoints_ == other.breakpoints_ && heights_ == other.heights_;
    }

private:
    PiecewiseConstantDensity() = default;
    std::vector<double> breakpoints_;
    std::vector<double> heights_;
    std::vector<double> cum_;
};

// A nonnegative mass vector over bins 1..n summing to 1.
class DiscretePmf {
public:
    static DiscretePmf make(std::vector<double> masses);

    const std::vector<double>& masses() const { return masses_; }
    std::size_t size() const { return masses_.size(); }
    double operator[](std::size_t i) const { return masses_[i]; }

    bool operator==(const DiscretePmf& other) const { return masses_ == other.masses_; }

private:
    DiscretePmf() = default;
    std::vector<double> masses_;
};

enum class Source : std::uint8_t { P, Q };

// One sample value plus which distribution it came from.
struct LabeledSample {
    double value;
    Source label;
};

// Validating constructor; rejects non-ascending breakpoints, negative
// heights and non-unit total mass (reporting the integral).
PiecewiseConstantDensity make_pwc(std::vector<double> breakpoints,
                                  std::vector<double> heights);

PiecewiseConstantDensity uniform_density();

// Density of (p+q)/2 on the merged breakpoint grid.
PiecewiseConstantDensity mixture_half(const PiecewiseConstantDensity& p,
                                      const PiecewiseConstantDensity& q);

// Push both densities forward through the CDF of their mixture, restricted
// to the closure of the mixture support.  The transform is monotone, so it
// preserves the ordering of samples and every A_k distance; the output
// heights satisfy p'(x) + q'(x) = 2 exactly on every piece.
std::pair<PiecewiseConstantDensity, PiecewiseConstantDensity>
flatten_pair(const PiecewiseConstantDensity& p, const PiecewiseConstantDensity& q);

// Merged sorted union of two breakpoint grids.
std::vector<double> merge_breakpoints(const std::vector<double>& a,
                                      const std::vector<double>& b);

} // namespace akct
