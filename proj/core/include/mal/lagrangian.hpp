#pragma once

// Rearrangement-invariant convex Lagrangians on tangent vectors, evaluated
// through the decreasing rearrangement of (xi, mu_u). Every variant depends on
// its argument only through the joint distribution of values and weights, so
// the same evaluation serves smooth grid fields and arbitrary weighted sets.

#include "mal/grid.hpp"
#include "mal/rearrangement.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mal {

/// Integral of chi(xi) d mu_u with a finite convex Young weight chi.
struct Orlicz {
    std::string name;
    std::function<double(double)> chi;
    /// Set when chi(t) = |t|^p; enables the homogeneity and evenness flags.
    std::optional<double> power;
};

/// sup over unions of atoms E of (int_E |xi| d mu) / mu(E)^alpha.
struct LorentzWeak {
    double alpha;
};

/// (int |xi|^p d mu)^(1/p).
struct Power {
    double p;
};

/// max over members of a + sup over rearrangements f of f0 of int f xi d mu.
struct SupFamily {
    struct Member {
        double a;
        StepFunction f0;
    };
    std::vector<Member> members;
};

class LagrangianSpec {
public:
    using Variant = std::variant<Orlicz, LorentzWeak, Power, SupFamily>;

    /// chi(t) = |t|^p, named "orlicz:p<p>".
    static LagrangianSpec orlicz_power(double p);
    /// Black-box Young weight; convexity is spot-checked on a probe grid.
    static LagrangianSpec orlicz(std::string name, std::function<double(double)> chi);
    static LagrangianSpec lorentz_weak(double alpha);
    static LagrangianSpec power(double p);
    static LagrangianSpec sup_family(std::vector<SupFamily::Member> members, std::string source = "inline");

    const Variant& variant() const noexcept { return variant_; }
    /// Text form: orlicz:p2, lorentz:a0.5, power:p1, supfam:<source>.
    const std::string& text() const noexcept { return text_; }

    /// L(c xi) = c L(xi) for c > 0.
    bool positively_homogeneous() const;
    /// L(-xi) = L(xi) is known to hold.
    bool even() const;

private:
    LagrangianSpec(Variant v, std::string text) : variant_(std::move(v)), text_(std::move(text)) {}

    Variant variant_;
    std::string text_;
};

/// Evaluation on a weighted set (the rearrangement extension).
double evaluate(const LagrangianSpec& spec, const WeightedValues& xi);
/// Evaluation of xi as a tangent vector at u.
double evaluate(const LagrangianSpec& spec, const Potential& u, const GridField& xi);

struct InvarianceReport {
    double discrepancy;
    double threshold;
    bool pass;
};

/// Compares L on two weighted sets that must be equidistributed within tol
/// (NotEquidistributed otherwise). Passes when the discrepancy is at most
/// tol * max(1, lipschitz_bound).
InvarianceReport check_invariance(const LagrangianSpec& spec, const WeightedValues& a, const WeightedValues& b,
                                  double tol, double lipschitz_bound = 1.0);
InvarianceReport check_invariance(const LagrangianSpec& spec, const Potential& u, const GridField& xi,
                                  const Potential& v, const GridField& eta, double tol, double lipschitz_bound = 1.0);

struct ConvexityReport {
    /// max of L(s xi + (1-s) eta) - (s L(xi) + (1-s) L(eta)) over probes.
    double worst_violation;
    int probes;
    bool pass;
};

/// Midpoint inequality for (xi, eta) plus `samples` random convex
/// combinations, each compared against 1e-12 absolute slack.
ConvexityReport check_fiber_convexity(const LagrangianSpec& spec, const Potential& u, const GridField& xi,
                                      const GridField& eta, int samples, std::uint64_t seed);

/// Empirical equi-Lipschitz constant on the ball of radius R: max over
/// random pairs and random potentials on `grid` of |L(xi) - L(eta)| / |xi - eta|_sup.
double estimate_lipschitz(const LagrangianSpec& spec, const Grid& grid, double radius, int trials, std::uint64_t seed);

/// One step of a strong-continuity schedule: xi_k against xi on the same atoms.
struct ContinuityStep {
    WeightedValues base;
    WeightedValues perturbed;
};

struct ContinuityReport {
    std::vector<double> discrepancies;
    /// Mass of the atoms where the two fields differ.
    std::vector<double> masses;
    bool pass;
};

/// Passes when every step whose differing mass is below tol_mass has
/// discrepancy below tol.
ContinuityReport check_strong_continuity(const LagrangianSpec& spec, const std::vector<ContinuityStep>& schedule,
                                         double tol, double tol_mass);

}  // namespace mal
