#pragma once

// Path actions, least actions through connecting weak geodesics, random
// piecewise-linear competitors, and the verification experiments built on
// them. Every verification carries at least one negative control: an
// instance constructed to violate the claim, which must be observed failing.

#include "mal/geodesic.hpp"
#include "mal/lagrangian.hpp"
#include "mal/transport.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mal {

enum class Quadrature {
    /// L(u'(t_i)) at u(t_i) times the interval length, u' the right derivative.
    knot_right_derivative,
    /// L of the difference quotient at the average of the interval's knots.
    midpoint,
    /// Gauss-Legendre nodes inside each linear segment (4 per interval).
    gauss_legendre,
};

std::string_view to_string(Quadrature q);

struct ActionReport {
    double value;
    std::vector<double> per_interval_contributions;
    Quadrature quadrature;
};

/// Default quadrature: Gauss-Legendre for piecewise-linear paths, midpoint
/// for solver-native paths.
ActionReport path_action(const LagrangianSpec& spec, const PotentialPath& path);
ActionReport path_action(const LagrangianSpec& spec, const PotentialPath& path, Quadrature quadrature);

struct LeastActionQuery {
    Potential w;
    Potential w_prime;
    double T;
    LagrangianSpec spec;
    WeakGeodesicOptions options;
};

/// Action of the connecting weak geodesic on [0, T].
double least_action(const LeastActionQuery& q);

struct LeastActions {
    WeakGeodesic geodesic;
    /// One value per requested spec, all along the same geodesic.
    std::vector<double> values;
};

LeastActions least_actions(const std::vector<LagrangianSpec>& specs, const Potential& w, const Potential& w_prime,
                           double T, WeakGeodesicOptions options);

struct CompetitorOptions {
    /// Interior knots; 0 gives the linear path.
    int knot_budget = 3;
    /// Sup norm of the perturbation before any shrinking.
    double amplitude = 0.05;
    int max_mode = 2;
    /// Interior knot times are drawn from a random monotone warp of [0, T],
    /// which makes the speed along the linear interpolant non-constant.
    bool time_warp = true;
};

/// `count` piecewise-linear paths from w to w_prime on [0, T]. Deterministic
/// per (seed, index). Throws GenerationFailed when 50 halvings of a knot's
/// perturbation still leave the potentials.
std::vector<PotentialPath> competitor_paths(const Potential& w, const Potential& w_prime, double T, int count,
                                            std::uint64_t seed, const CompetitorOptions& options = {});

struct CheckRecord {
    std::string check;
    /// The measured violation: positive values mean the claim failed by that much.
    double value;
    double tolerance;
    /// Genuine checks: value <= tolerance. Negative controls: value > tolerance.
    bool pass;
    bool negative_control = false;
    /// Per-instance values behind `value` (least-action margins, discrepancies).
    std::vector<double> samples = {};
    /// Reported measurement without a pass/fail claim; never affects the report.
    bool informational = false;
};

struct VerificationReport {
    std::string experiment;
    std::vector<CheckRecord> checks;
    /// Largest violation among genuine checks.
    double worst_violation = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    std::uint64_t seed = 0;
    int n = 0;
    int time_steps = 0;
    double epsilon = 0.0;

    void add_check(std::string name, double value, double tol, std::vector<double> samples = {});
    void add_control(std::string name, double value, double tol);
    void add_observation(std::string name, double value);
};

/// Geodesic action <= competitor action + tol for every competitor and every
/// spec. Control: the path through (w + w_prime)/2 + detour_shift posing as
/// the minimizer, with the geodesic as its competitor.
VerificationReport verify_least_action(const std::vector<LagrangianSpec>& specs, const Potential& w,
                                       const Potential& w_prime, double T, int count, std::uint64_t seed, double tol,
                                       const WeakGeodesicOptions& options, const CompetitorOptions& competitors = {},
                                       double detour_shift = 0.5);

struct TriangleOptions {
    double epsilon = 1e-3;
    int time_steps = 32;
    double solver_tol = 1e-9;
    int max_iter = 50;
    /// Used for the weak geodesic of the degenerate (constant-leg) case.
    WeakGeodesicOptions weak = {};
};

/// (1/T) int_a^b L(u') >= L(v_b'(0)) - L(v_a'(0)) for eps-geodesic legs
/// v_a, v_b on [0, T] (T = b - a) from `apex` to u(a) and u(b). When apex
/// equals u(a) the constant leg and the weak geodesic from u(a) to u(b) are
/// used instead. Control: legs run on [0, T/3] (mis-timed triangle, degenerate
/// configuration). Throws HomogeneityRequired for specs that are not
/// positively homogeneous.
VerificationReport verify_comparison_inequality(const LagrangianSpec& spec, const PotentialPath& u_path,
                                                const Potential& apex, double tol, const TriangleOptions& options);

struct NoetherOptions {
    double tol = 5e-3;
    /// D in the control path u(t) + D s^2, s the relative time.
    double control_drift = 0.5;
};

/// max_i |L(u'(t_i)) - mean| <= tol. The pairwise equidistribution
/// discrepancy of the knot velocities is reported as an observation.
/// Control: the path plus an accelerating constant drift.
VerificationReport verify_noether(const std::vector<LagrangianSpec>& specs, const PotentialPath& path,
                                  const NoetherOptions& options = {});

/// Largest pairwise rearrangement distance between the knot velocities of a
/// path (each taken with its own knot's measure).
double velocity_equidistribution_discrepancy(const PotentialPath& path);

struct JacobiConvexityOptions {
    double delta = 3e-4;
    double tol = 1e-4;
    double control_amplitude = 10.0;
    std::uint64_t seed = 1;
};

/// Midpoint convexity of t -> L(xi(t)) along the eps-Jacobi field with the
/// given endpoint directions. Control: the linear blend of the directions
/// plus control_amplitude * sin(pi t) * h, h a fixed band-limited field.
VerificationReport verify_jacobi_convexity(const std::vector<LagrangianSpec>& specs, const EpsGeodesicProblem& p,
                                           const GridField& direction_a, const GridField& direction_b,
                                           const JacobiConvexityOptions& options = {});

/// Largest value of g_i - (g_{i-1} + g_{i+1}) / 2 over interior indices.
double midpoint_convexity_violation(const std::vector<double>& g);

/// Midpoint convexity of t -> L_S(u(t), v(t)) on the knot triples
/// (i - d, i, i + d) for i in `centers`. Control: the triple around the middle
/// knot with v = u and u shifted by the constant A sin(pi r), r the relative
/// time, whose least action is concave in r there.
VerificationReport verify_action_convexity(const std::vector<LagrangianSpec>& specs, const PotentialPath& u_path,
                                           const PotentialPath& v_path, double S, const std::vector<int>& centers,
                                           int spacing, double tol, const WeakGeodesicOptions& options,
                                           double control_amplitude = 1.0);

/// |L_T(w_j, w_j') - L_T(w, w')| along decreasing sequences: the last value
/// must be below tol and the tail must not increase by more than tol.
/// Control: the pair (w, w' +- control_shift), the sign widening the mean gap.
VerificationReport verify_least_action_continuity(const std::vector<LagrangianSpec>& specs,
                                                  const std::vector<Potential>& w_seq,
                                                  const std::vector<Potential>& w_prime_seq, const Potential& w,
                                                  const Potential& w_prime, double T, double tol,
                                                  const WeakGeodesicOptions& options, double control_shift = 0.1);

}  // namespace mal
