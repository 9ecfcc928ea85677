#include "fixtures.hpp"
#include "mal/error.hpp"
#include "mal/lagrangian.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace mal;
using namespace mal::testing;

namespace {

LagrangianSpec linear_sup_family() { return LagrangianSpec::sup_family({{0.0, StepFunction::constant(1.0)}}); }

LagrangianSpec two_member_family() {
    return LagrangianSpec::sup_family(
        {{0.0, StepFunction({0.0, 0.5, 1.0}, {1.0, -1.0})}, {0.0, StepFunction({0.0, 0.25, 1.0}, {2.0, 0.0})}});
}

}  // namespace

TEST(LagrangianSpec, TextFormsAndFlags) {
    EXPECT_EQ(LagrangianSpec::orlicz_power(2).text(), "orlicz:p2");
    EXPECT_EQ(LagrangianSpec::lorentz_weak(0.5).text(), "lorentz:a0.5");
    EXPECT_EQ(LagrangianSpec::power(1).text(), "power:p1");
    EXPECT_FALSE(LagrangianSpec::orlicz_power(2).positively_homogeneous());
    EXPECT_TRUE(LagrangianSpec::orlicz_power(1).positively_homogeneous());
    EXPECT_TRUE(LagrangianSpec::lorentz_weak(0.5).positively_homogeneous());
    EXPECT_TRUE(LagrangianSpec::power(2).positively_homogeneous());
    EXPECT_TRUE(linear_sup_family().positively_homogeneous());
    EXPECT_FALSE(LagrangianSpec::sup_family({{1.0, StepFunction::constant(1.0)}}).positively_homogeneous());
    EXPECT_TRUE(LagrangianSpec::power(3).even());
    EXPECT_FALSE(linear_sup_family().even());
}

TEST(LagrangianSpec, RejectsInvalidParameters) {
    EXPECT_THROW(LagrangianSpec::lorentz_weak(1.0), std::invalid_argument);
    EXPECT_THROW(LagrangianSpec::lorentz_weak(0.0), std::invalid_argument);
    EXPECT_THROW(LagrangianSpec::power(0.5), std::invalid_argument);
    EXPECT_THROW(LagrangianSpec::orlicz("concave", [](double t) { return -t * t; }), std::invalid_argument);
    EXPECT_THROW(LagrangianSpec::sup_family({}), std::invalid_argument);
    EXPECT_THROW(LagrangianSpec::sup_family({{0.0, StepFunction::constant(1.0, 0.5)}}), std::invalid_argument);
}

TEST(Evaluate, ClosedForms) {
    const Grid g(4);
    const Potential zero = constant_potential(g, 0.0);
    EXPECT_NEAR(evaluate(LagrangianSpec::lorentz_weak(0.5), zero, GridField(g, 1.0)), 1.0, 1e-15);
    GridField quarter(g, 0.0);
    for (int j = 0; j < 4; ++j) quarter(0, j) = 1.0;
    EXPECT_NEAR(evaluate(LagrangianSpec::lorentz_weak(0.5), zero, quarter), 0.5, 1e-15);

    std::mt19937_64 rng(1);
    const Grid g32(32);
    const Potential u = random_endpoint(g32, 0.0, 0.01, rng);
    EXPECT_NEAR(evaluate(LagrangianSpec::orlicz_power(2), u, GridField(g32, -1.5)), 2.25, 1e-13);
    const GridField xi = random_band_limited(g32, 2, rng);
    EXPECT_NEAR(evaluate(linear_sup_family(), u, xi), integrate(xi, u), 1e-14);
    const double p3 = evaluate(LagrangianSpec::orlicz_power(3), u, xi);
    EXPECT_NEAR(evaluate(LagrangianSpec::power(3), u, xi), std::cbrt(p3), 1e-14);
}

TEST(Evaluate, LorentzMatchesSubsetBruteForce) {
    // All 2^16 unions of cells on a 4x4 grid.
    const Grid g(4);
    std::mt19937_64 rng(7);
    const GridField xi = random_band_limited(g, 1, rng);
    const Potential zero = constant_potential(g, 0.0);
    double best = 0.0;
    for (unsigned mask = 1; mask < (1u << 16); ++mask) {
        double s = 0.0;
        int count = 0;
        for (unsigned k = 0; k < 16; ++k) {
            if (mask & (1u << k)) {
                s += std::abs(xi[k]);
                ++count;
            }
        }
        best = std::max(best, (s / 16.0) / std::sqrt(count / 16.0));
    }
    EXPECT_NEAR(evaluate(LagrangianSpec::lorentz_weak(0.5), zero, xi), best, 1e-13);
}

TEST(Evaluate, SupFamilyIsMaxOfMembers) {
    const WeightedValues xi({3.0, -1.0, 0.5, 2.0}, {0.25, 0.25, 0.25, 0.25});
    // member 1: top half +1, bottom half -1 paired with sorted (3, 2, 0.5, -1)
    // gives (3 + 2 - 0.5 + 1)/4; member 2: top quarter 2 gives 2*3/4.
    EXPECT_NEAR(evaluate(two_member_family(), xi), std::max(5.5 / 4, 1.5), 1e-15);
}

TEST(Invariance, PermutationsAndTransfer) {
    std::mt19937_64 rng(3);
    const Grid g(16);
    const Potential zero = constant_potential(g, 0.0);
    const GridField xi = random_band_limited(g, 2, rng);
    GridField permuted(g);
    std::vector<std::size_t> idx(xi.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < idx.size(); ++k) permuted[k] = xi[idx[k]];
    const Potential other = random_endpoint(g, 0.0, 0.02, rng);
    for (const auto& spec : {LagrangianSpec::orlicz_power(2), LagrangianSpec::lorentz_weak(0.5),
                             LagrangianSpec::power(1), two_member_family()}) {
        EXPECT_TRUE(check_invariance(spec, zero, xi, zero, xi, 0.0).pass);
        const InvarianceReport r = check_invariance(spec, zero, xi, zero, permuted, 1e-12);
        EXPECT_TRUE(r.pass) << spec.text() << " " << r.discrepancy;
        const StepFunction star = decreasing_rearrangement(weighted_values(zero, xi));
        const TransferredValues moved = transfer(star, theta_map(weighted_values(other, xi)));
        const InvarianceReport t = check_invariance(spec, weighted_values(zero, xi), moved.values, 1e-9);
        EXPECT_TRUE(t.pass) << spec.text() << " " << t.discrepancy;
    }
    EXPECT_THROW(check_invariance(LagrangianSpec::power(1), zero, xi, zero, xi * 2.0, 1e-9), NotEquidistributed);
}

TEST(FiberConvexity, HoldsAndIsStrictForDisjointIndicators) {
    std::mt19937_64 rng(5);
    const Grid g(4);
    const Potential zero = constant_potential(g, 0.0);
    const GridField xi = random_band_limited(g, 1, rng);
    const GridField eta = random_band_limited(g, 1, rng);
    EXPECT_LE(check_fiber_convexity(LagrangianSpec::orlicz_power(2), zero, xi, xi, 4, 1).worst_violation, 1e-15);
    for (const auto& spec : {LagrangianSpec::orlicz_power(2), LagrangianSpec::lorentz_weak(0.5),
                             LagrangianSpec::power(1), two_member_family()}) {
        EXPECT_TRUE(check_fiber_convexity(spec, zero, xi, eta, 20, 9).pass) << spec.text();
    }
    GridField a(g, 0.0);
    GridField b(g, 0.0);
    a(0, 0) = 1.0;
    b(2, 2) = 1.0;
    const LagrangianSpec lw = LagrangianSpec::lorentz_weak(0.5);
    const double mid = evaluate(lw, zero, (a + b) * 0.5);
    EXPECT_LT(mid, 0.5 * (evaluate(lw, zero, a) + evaluate(lw, zero, b)) - 1e-3);
}

TEST(Lipschitz, KnownBounds) {
    const Grid g(8);
    EXPECT_LE(estimate_lipschitz(LagrangianSpec::power(1), g, 3.0, 200, 1), 1.0 + 1e-9);
    EXPECT_LE(estimate_lipschitz(LagrangianSpec::orlicz_power(2), g, 1.0, 200, 2), 2.0 + 1e-9);
}

TEST(StrongContinuity, VanishingMassPerturbation) {
    std::vector<ContinuityStep> orlicz_steps;
    std::vector<double> masses;
    for (int n : {8, 16, 32, 64}) {
        const Grid g(n);
        const Potential zero = constant_potential(g, 0.0);
        std::mt19937_64 rng(static_cast<unsigned>(n));
        const GridField xi = random_band_limited(g, 1, rng);
        GridField bumped = xi;
        bumped(0, 0) += 1.0;
        orlicz_steps.push_back({weighted_values(zero, xi), weighted_values(zero, bumped)});
        masses.push_back(1.0 / (n * n));
    }
    const ContinuityReport o = check_strong_continuity(LagrangianSpec::orlicz_power(2), orlicz_steps, 1e-2, 1e-3);
    EXPECT_TRUE(o.pass);
    for (std::size_t k = 1; k < o.discrepancies.size(); ++k) EXPECT_LT(o.discrepancies[k], o.discrepancies[k - 1]);
    const ContinuityReport l = check_strong_continuity(LagrangianSpec::lorentz_weak(0.5), orlicz_steps, 1e-1, 1e-3);
    for (std::size_t k = 0; k < l.discrepancies.size(); ++k) {
        EXPECT_LE(l.discrepancies[k], std::sqrt(masses[k]) * 1.0 + 1e-12);
    }
    const ContinuityReport same = check_strong_continuity(
        LagrangianSpec::power(1), {{orlicz_steps[0].base, orlicz_steps[0].base}}, 1e-15, 1.0);
    EXPECT_EQ(same.discrepancies[0], 0.0);
}
