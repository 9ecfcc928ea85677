#pragma once

// Equidistribution and decreasing rearrangements of finite weighted sets.
//
// The decreasing rearrangement of (values, weights) is the left-continuous,
// decreasing step function on (0, M] whose super-level sets have the same
// measure as those of the input:  |{s : xi*(s) >= t}| = mu(xi >= t).

#include "mal/grid.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mal {

/// Default tolerance of equidistributed(), relative to total mass.
inline constexpr double default_equidistribution_tol = 1e-9;

class StepFunction {
public:
    /// breakpoints = (0 = s_0 < s_1 < ... < s_k = M), levels = (v_1 > ... > v_k);
    /// level v_j is taken on (s_{j-1}, s_j]. Throws std::invalid_argument when
    /// the ordering invariants fail.
    StepFunction(std::vector<double> breakpoints, std::vector<double> levels);

    /// The constant function c on (0, mass].
    static StepFunction constant(double c, double mass = 1.0);

    std::span<const double> breakpoints() const noexcept { return breakpoints_; }
    std::span<const double> levels() const noexcept { return levels_; }
    std::size_t steps() const noexcept { return levels_.size(); }
    double total_mass() const noexcept { return breakpoints_.back(); }

    /// Left-continuous evaluation; s <= 0 returns the top level and s beyond
    /// the mass returns the bottom level.
    double operator()(double s) const;

    /// Integral of fn(level) ds over (0, M].
    double integrate(const std::function<double(double)>& fn) const;
    double integral() const;

    friend bool operator==(const StepFunction&, const StepFunction&) = default;

private:
    std::vector<double> breakpoints_;
    std::vector<double> levels_;
};

/// Measure-preserving assignment of the atoms to consecutive subintervals of
/// (0, M]: atom ordering[p] owns (interval_bounds[p], interval_bounds[p+1]].
struct ThetaMap {
    std::vector<std::size_t> ordering;
    std::vector<double> interval_bounds;
};

StepFunction decreasing_rearrangement(const WeightedValues& wv);

/// True iff the decreasing rearrangements agree up to tol: after merging
/// breakpoints, every piece longer than tol carries levels within tol.
/// Throws MassMismatch if the masses differ by more than tol.
bool equidistributed(const WeightedValues& a, const WeightedValues& b, double tol = default_equidistribution_tol);
bool equidistributed(const StepFunction& a, const StepFunction& b, double tol = default_equidistribution_tol);

/// Integral of |a* - b*| over the common support. Zero iff equidistributed
/// (for equal masses).
double rearrangement_distance(const StepFunction& a, const StepFunction& b);

/// Atoms sorted by value descending, ties broken by atom index.
ThetaMap theta_map(const WeightedValues& wv);

/// f composed with theta: on the common refinement of the theta intervals and
/// the breakpoints of f, each piece becomes an atom carrying f's level. The
/// result is equidistributed with f exactly (up to the rounding of the bounds).
/// owner[k] reports which input atom the k-th piece came from.
struct TransferredValues {
    WeightedValues values;
    std::vector<std::size_t> owner;
};
TransferredValues transfer(const StepFunction& f, const ThetaMap& theta);

/// Rearrangement of wv evaluated on its own atoms, xi* o theta. Exact.
WeightedValues pull_back(const StepFunction& f, const ThetaMap& theta, const WeightedValues& wv);

/// (g(x) - g(y)) (h(x) - h(y)) >= 0 for all pairs, in O(k log k).
/// Throws std::invalid_argument if the two sets have different sizes.
bool similarly_ordered(std::span<const double> g, std::span<const double> h);
bool similarly_ordered(const WeightedValues& g, const WeightedValues& h);

/// Supremum of the pairing of eta with any rearrangement of f0, computed as
/// the integral of f0* eta* over the common refinement. Throws MassMismatch
/// if masses differ by more than 1e-9 relative.
double hardy_littlewood_sup(const StepFunction& f0, const WeightedValues& eta);

}  // namespace mal
