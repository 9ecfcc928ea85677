#include "fixtures.hpp"
#include "mal/error.hpp"
#include "mal/geodesic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mal;
using namespace mal::testing;

namespace {

EpsGeodesicProblem standard_problem(const Grid& g, double eps, int m) {
    return EpsGeodesicProblem{standard_a(g), standard_b(g), 0.0, 1.0, eps, m, 1e-10, 50};
}

}  // namespace

TEST(EpsGeodesic, ValidateRejectsBadProblems) {
    const Grid g(8);
    const Potential z = constant_potential(g, 0.0);
    EpsGeodesicProblem p{z, z, 0.0, 1.0, 0.1, 8, 1e-8, 50};
    EXPECT_NO_THROW(p.validate());
    auto bad = p;
    bad.epsilon = -1.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = p;
    bad.time_steps = 1;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = p;
    bad.solver_tol = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = p;
    bad.b = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = p;
    bad.endpoint_b = constant_potential(Grid(16), 0.0);
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(EpsGeodesic, ConstantEndpointsMatchClosedForm) {
    const Grid g(16);
    for (double eps : {1e-6, 0.1, 1.0}) {
        const EpsGeodesicProblem p{constant_potential(g, 0.3), constant_potential(g, -0.2), 0.5, 2.0, eps, 12, 1e-12, 50};
        const GeodesicSolution s = solve_epsilon_geodesic(p);
        ASSERT_EQ(s.path.size(), 13u);
        for (std::size_t k = 0; k < s.path.size(); ++k) {
            const double t = s.path.times()[k];
            const double exact = 0.3 + (t - 0.5) / 1.5 * (-0.5) + eps * (t - 0.5) * (t - 2.0) / 2.0;
            EXPECT_LE(sup_distance(s.path.knot(k).field(), GridField(g, exact)), 1e-10) << eps << " " << t;
        }
        EXPECT_LE(s.residual_norm, 1e-10);
    }
}

TEST(EpsGeodesic, SolvesTrigEndpointsToTolerance) {
    const Grid g(16);
    const GeodesicSolution s = solve_epsilon_geodesic(standard_problem(g, 0.1, 16));
    EXPECT_LE(s.residual_norm, 1e-10);
    EXPECT_FALSE(s.residual_history.empty());
    EXPECT_EQ(sup_distance(s.path.knot(0).field(), standard_a(g).field()), 0.0);
    EXPECT_EQ(sup_distance(s.path.knot(16).field(), standard_b(g).field()), 0.0);
    for (const auto& c : hcma_residual(s.path)) EXPECT_LE(sup_distance(c, GridField(g, 0.1)), 1e-8);
}

TEST(EpsGeodesic, ConvexInTime) {
    const Grid g(16);
    const GeodesicSolution s = solve_epsilon_geodesic(standard_problem(g, 0.05, 16));
    for (std::size_t k = 1; k + 1 < s.path.size(); ++k) {
        const GridField second = s.path.knot(k - 1).field() + s.path.knot(k + 1).field() - 2.0 * s.path.knot(k).field();
        EXPECT_GT(second.min(), 0.0);
    }
}

TEST(EpsGeodesic, TimeReversal) {
    const Grid g(16);
    const GeodesicSolution fwd = solve_epsilon_geodesic(standard_problem(g, 0.1, 16));
    const EpsGeodesicProblem back{standard_b(g), standard_a(g), 0.0, 1.0, 0.1, 16, 1e-10, 50};
    const GeodesicSolution bwd = solve_epsilon_geodesic(back);
    EXPECT_LE(path_distance(fwd.path.reversed(), bwd.path), 1e-9);
}

TEST(EpsGeodesic, NonConvergenceWithTinyIterationBudget) {
    const Grid g(16);
    EpsGeodesicProblem p = standard_problem(g, 0.1, 16);
    p.max_iter = 1;
    p.solver_tol = 1e-14;
    EXPECT_THROW(solve_epsilon_geodesic(p), NonConvergence);
}

TEST(WeakGeodesic, ConstantsGiveLinearPath) {
    const Grid g(8);
    WeakGeodesicOptions o;
    o.time_steps = 8;
    const WeakGeodesic w = weak_geodesic(constant_potential(g, 0.0), constant_potential(g, 1.0), o);
    EXPECT_LE(w.final_epsilon, o.max_final_epsilon);
    for (std::size_t k = 0; k < w.path.size(); ++k) {
        EXPECT_LE(sup_distance(w.path.knot(k).field(), GridField(g, w.path.times()[k])), w.final_epsilon);
    }
    ASSERT_EQ(w.successive_distances.size() + 1, w.epsilons.size());
}

TEST(WeakGeodesic, EqualEndpointsGiveNearlyConstantPath) {
    const Grid g(16);
    WeakGeodesicOptions o;
    o.time_steps = 16;
    const WeakGeodesic w = weak_geodesic(standard_a(g), standard_a(g), o);
    for (const auto& k : w.path.knots()) EXPECT_LE(sup_distance(k.field(), standard_a(g).field()), 1e-4);
    EXPECT_LE(w.residual_norm, 1e-6);
}

TEST(Hcma, LinearConstantPathHasZeroResidual) {
    const Grid g(8);
    std::vector<double> t{0.0, 0.3, 1.0};
    std::vector<Potential> k{constant_potential(g, 0.0), constant_potential(g, 0.3), constant_potential(g, 1.0)};
    for (const auto& c : hcma_residual(PotentialPath(t, k, Interpolation::solver_native))) {
        EXPECT_LE(c.sup_norm(), 1e-14);
    }
}

TEST(Jacobi, ConstantDirectionsGiveLinearField) {
    const Grid g(16);
    const EpsGeodesicProblem p = standard_problem(g, 0.1, 16);
    const auto xi = jacobi_field(p, GridField(g, 1.0), GridField(g, 3.0), 1e-3);
    for (std::size_t k = 0; k < xi.size(); ++k) {
        EXPECT_LE(sup_distance(xi[k], GridField(g, 1.0 + 2.0 * k / 16.0)), 1e-6);
    }
    const auto zero = jacobi_field(p, GridField(g, 0.0), GridField(g, 0.0), 1e-3);
    for (const auto& z : zero) EXPECT_EQ(z.sup_norm(), 0.0);
}

TEST(Jacobi, FieldSatisfiesLinearizedEquation) {
    const Grid g(16);
    std::mt19937_64 rng(9);
    const GridField da = random_band_limited(g, 1, rng);
    const GridField db = random_band_limited(g, 1, rng);
    std::vector<double> residuals;
    for (int m : {16, 32}) {
        const EpsGeodesicProblem p = standard_problem(g, 0.1, m);
        const GeodesicSolution base = solve_epsilon_geodesic(p);
        residuals.push_back(jacobi_residual(base, jacobi_field(p, da, db, 3e-4, base)));
        // A field that is not Jacobi: the linear blend of the directions.
        std::vector<GridField> blend;
        for (int k = 0; k <= m; ++k) blend.push_back(lerp(da, db, static_cast<double>(k) / m));
        EXPECT_GT(jacobi_residual(base, blend), 20.0 * residuals.back());
    }
    EXPECT_LT(residuals[1], residuals[0] / 2.0);
}

TEST(Jacobi, CentralDifferenceIsSecondOrderInDelta) {
    const Grid g(16);
    const EpsGeodesicProblem p = standard_problem(g, 0.1, 8);
    const GeodesicSolution base = solve_epsilon_geodesic(p);
    std::mt19937_64 rng(10);
    const GridField da = random_band_limited(g, 1, rng);
    const GridField db = random_band_limited(g, 1, rng);
    const auto x1 = jacobi_field(p, da, db, 4e-3, base);
    const auto x2 = jacobi_field(p, da, db, 2e-3, base);
    const auto x4 = jacobi_field(p, da, db, 1e-3, base);
    double d12 = 0.0;
    double d24 = 0.0;
    for (std::size_t k = 0; k < x1.size(); ++k) {
        d12 = std::max(d12, sup_distance(x1[k], x2[k]));
        d24 = std::max(d24, sup_distance(x2[k], x4[k]));
    }
    EXPECT_LT(d24, d12 / 2.5);
}

TEST(Jacobi, PerturbationTooLarge) {
    const Grid g(16);
    const GridField wild = GridField::sample(g, [](double x, double) { return std::cos(2 * two_pi * x); });
    EXPECT_THROW(jacobi_field(standard_problem(g, 0.1, 8), wild, wild, 1.0), PerturbationTooLarge);
}

TEST(MonotoneLimit, DecreasingConstantSequences) {
    const Grid g(8);
    std::vector<Potential> as;
    std::vector<Potential> bs;
    for (int j = 1; j <= 5; ++j) {
        as.push_back(constant_potential(g, 1.0 / j));
        bs.push_back(constant_potential(g, 1.0 + 1.0 / j));
    }
    WeakGeodesicOptions o;
    o.time_steps = 8;
    const MonotoneLimitReport r =
        monotone_limit_check(as, bs, constant_potential(g, 0.0), constant_potential(g, 1.0), o);
    EXPECT_LE(r.worst_violation, 1e-4);
    EXPECT_NEAR(r.final_distance, 0.2, 1e-4);
    for (std::size_t j = 1; j < r.distances.size(); ++j) EXPECT_LT(r.distances[j], r.distances[j - 1]);
}
