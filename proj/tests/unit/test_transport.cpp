#include "fixtures.hpp"
#include "mal/error.hpp"
#include "mal/geodesic.hpp"
#include "mal/transport.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mal;
using namespace mal::testing;

namespace {

std::vector<double> uniform(double a, double b, int m) {
    std::vector<double> t;
    for (int k = 0; k <= m; ++k) t.push_back(a + (b - a) * k / m);
    return t;
}

PotentialPath constant_knots_path(const Grid& g, const std::vector<double>& times, double (*fn)(double),
                                  Interpolation interp) {
    std::vector<Potential> knots;
    for (double t : times) knots.push_back(constant_potential(g, fn(t)));
    return PotentialPath(times, std::move(knots), interp);
}

}  // namespace

TEST(PotentialPath, ValidatesConstruction) {
    const Grid g(8);
    const Potential z = constant_potential(g, 0.0);
    EXPECT_THROW(PotentialPath({0.0}, {z}, Interpolation::piecewise_linear), std::invalid_argument);
    EXPECT_THROW(PotentialPath({0.0, 0.0}, {z, z}, Interpolation::piecewise_linear), std::invalid_argument);
    EXPECT_THROW(PotentialPath({0.0, 1.0}, {z}, Interpolation::piecewise_linear), std::invalid_argument);
    EXPECT_THROW(PotentialPath({0.0, 1.0}, {z, constant_potential(Grid(16), 0.0)}, Interpolation::piecewise_linear),
                 std::invalid_argument);
    const PotentialPath p({0.0, 2.0}, {z, constant_potential(g, 4.0)}, Interpolation::piecewise_linear);
    EXPECT_DOUBLE_EQ(p.at(0.5).field()(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(p.reversed().knot(0).field()(0, 0), 4.0);
}

TEST(Velocity, ConstantLinearAndQuadraticPaths) {
    const Grid g(8);
    const auto times = uniform(0.0, 2.0, 8);
    const PathVelocity still =
        velocity(constant_knots_path(g, times, [](double) { return 1.0; }, Interpolation::piecewise_linear));
    for (const auto& v : still.values) EXPECT_EQ(v.sup_norm(), 0.0);

    const PathVelocity lin =
        velocity(constant_knots_path(g, times, [](double t) { return 3.0 * t / 2.0; }, Interpolation::piecewise_linear));
    for (const auto& v : lin.values) EXPECT_NEAR(v.max(), 1.5, 1e-14);

    const PathVelocity quad =
        velocity(constant_knots_path(g, times, [](double t) { return t * t; }, Interpolation::solver_native));
    ASSERT_EQ(quad.values.size(), times.size());
    for (std::size_t i = 0; i < times.size(); ++i) EXPECT_NEAR(quad.at_knot(i).max(), 2.0 * times[i], 1e-12);
}

TEST(TransportFlow, ConstantPathsGiveIdentity) {
    const Grid g(16);
    const auto times = uniform(0.0, 1.0, 4);
    const auto maps =
        transport_flow(constant_knots_path(g, times, [](double t) { return t; }, Interpolation::piecewise_linear), 4);
    for (const auto& m : maps) {
        EXPECT_TRUE(m.is_identity());
        EXPECT_LE(sup_distance(m.jacobian, GridField(g, 1.0)), 1e-14);
    }
}

TEST(TransportFlow, SpatiallyConstantVelocityOnNonConstantPath) {
    const Grid g(16);
    std::mt19937_64 rng(2);
    const Potential base = random_endpoint(g, 0.0, 0.01, rng);
    const PotentialPath p({0.0, 1.0}, {base, make_potential(base.field() + 0.3)}, Interpolation::piecewise_linear);
    for (const auto& m : transport_flow(p, 4)) {
        EXPECT_LE(m.displacement_x.sup_norm(), 1e-13);
        EXPECT_LE(m.displacement_y.sup_norm(), 1e-13);
    }
}

namespace {

// u(t) = t a cos(2 pi x): dx/dt = pi a sin(2 pi x) / (1 - 2 pi^2 a t cos(2 pi x)).
double cosine_path_error(int n) {
    const double a = 0.02;
    const Grid g(n);
    const GridField c = GridField::sample(g, [a](double x, double) { return a * std::cos(two_pi * x); });
    const PotentialPath p({0.0, 1.0}, {constant_potential(g, 0.0), make_potential(c)}, Interpolation::piecewise_linear);
    const auto maps = transport_flow(p, 64);
    const auto rhs = [a](double t, double x) {
        const double pi = std::numbers::pi;
        return pi * a * std::sin(two_pi * x) / (1.0 - 2.0 * pi * pi * a * t * std::cos(two_pi * x));
    };
    double worst = 0.0;
    for (int i = 0; i < g.n(); ++i) {
        double x = g.coord(i);
        const int steps = 2000;
        const double h = 1.0 / steps;
        for (int s = 0; s < steps; ++s) {
            const double t = s * h;
            const double k1 = rhs(t, x);
            const double k2 = rhs(t + h / 2, x + h / 2 * k1);
            const double k3 = rhs(t + h / 2, x + h / 2 * k2);
            const double k4 = rhs(t + h, x + h * k3);
            x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        worst = std::max(worst, std::abs(maps[1].displacement_x(i, 3) - (x - g.coord(i))));
        worst = std::max(worst, std::abs(maps[1].displacement_y(i, 3)));
    }
    return worst;
}

}  // namespace

TEST(TransportFlow, MatchesScalarReferenceForCosinePath) {
    const double e32 = cosine_path_error(32);
    const double e64 = cosine_path_error(64);
    EXPECT_LE(e32, 1e-3);
    EXPECT_LE(e64, e32 / 3.0);
}

TEST(TransportFlow, InverseUndoesForward) {
    const Grid g(16);
    std::mt19937_64 rng(4);
    const PotentialPath p({0.0, 0.5, 1.0},
                          {random_endpoint(g, 0.0, 0.01, rng), random_endpoint(g, 0.2, 0.01, rng),
                           random_endpoint(g, 0.1, 0.01, rng)},
                          Interpolation::piecewise_linear);
    const auto fwd = transport_flow(p, 16);
    const auto inv = inverse_transport_flow(p, 16);
    // phi^{-1}(phi(x)) = x: pull the inverse displacement back along phi.
    const GridField back_x = pullback(inv[2].displacement_x, fwd[2]);
    EXPECT_LE((back_x + fwd[2].displacement_x).sup_norm(), 5e-3);
    for (double r : pullback_density_residual(p, fwd)) EXPECT_LE(r, 0.15);
}

TEST(Pullback, ConstantsIdentityAndTranslation) {
    const Grid g(16);
    const GridField c(g, 2.0);
    std::vector<double> xs;
    std::vector<double> ys;
    for (int i = 0; i < g.n(); ++i) {
        for (int j = 0; j < g.n(); ++j) {
            xs.push_back(g.coord(i) + 0.25);
            ys.push_back(g.coord(j));
        }
    }
    const TransportMap shift = TransportMap::from_positions(g, xs, ys);
    EXPECT_LE(sup_distance(pullback(c, shift), c), 1e-13);
    std::mt19937_64 rng(1);
    const GridField r = random_band_limited(g, 2, rng);
    const GridField same = pullback(r, TransportMap::identity(g));
    for (std::size_t k = 0; k < r.size(); ++k) EXPECT_EQ(same[k], r[k]);
    const GridField cosx = GridField::sample(g, [](double x, double) { return std::cos(two_pi * x); });
    const GridField expected = GridField::sample(g, [](double x, double) { return -std::sin(two_pi * x); });
    EXPECT_LE(sup_distance(pullback(cosx, shift), expected), 1e-12);
    EXPECT_LE(sup_distance(shift.jacobian, GridField(g, 1.0)), 1e-12);
}

TEST(CovariantDerivative, ConstantPathReducesToTimeDerivative) {
    const Grid g(8);
    const auto times = uniform(0.0, 1.0, 4);
    const PotentialPath p = constant_knots_path(g, times, [](double t) { return t; }, Interpolation::piecewise_linear);
    std::mt19937_64 rng(6);
    const GridField f = random_band_limited(g, 2, rng);
    std::vector<GridField> xi;
    for (double t : times) xi.push_back(f * (3.0 * t));
    const auto d = covariant_derivative(p, xi);
    for (const auto& v : d) EXPECT_LE(sup_distance(v, f * 3.0), 1e-12);
}

TEST(CovariantDerivative, GeodesicVelocityEqualsEpsilonF) {
    const Grid g(16);
    const EpsGeodesicProblem prob{standard_a(g), standard_b(g), 0.0, 1.0, 0.1, 32, 1e-11, 50};
    const GeodesicSolution sol = solve_epsilon_geodesic(prob);
    const PathVelocity v = velocity(sol.path);
    const auto d = covariant_derivative(sol.path, v.values);
    for (std::size_t i = 2; i + 2 < d.size(); ++i) {
        EXPECT_LE(sup_distance(d[i], f_density(sol.path.knot(i)) * 0.1), 2e-3) << i;
    }
}

TEST(ParallelTransport, TransportedFieldIsNearlyCovariantConstant) {
    const Grid g(16);
    const EpsGeodesicProblem prob{standard_a(g), standard_b(g), 0.0, 1.0, 0.1, 16, 1e-10, 50};
    const GeodesicSolution sol = solve_epsilon_geodesic(prob);
    std::mt19937_64 rng(3);
    const GridField eta = random_band_limited(g, 1, rng);
    const auto xi = parallel_transport(sol.path, eta, 4);
    EXPECT_EQ(sup_distance(xi[0], eta), 0.0);
    double worst = 0.0;
    for (const auto& d : covariant_derivative(sol.path, xi)) worst = std::max(worst, d.sup_norm());
    EXPECT_LE(worst, 0.15);
}

TEST(SymplecticFlow, ConstantHamiltonianIsIdentity) {
    const Grid g(16);
    const TransportMap m = symplectic_flow({GridField(g, 3.0)}, constant_potential(g, 0.0), 8);
    EXPECT_TRUE(m.is_identity());
}

TEST(SymplecticFlow, ShearIsExact) {
    // zeta = sin(2 pi y)/(2 pi): sgrad = (-cos(2 pi y), 0), a shear.
    const Grid g(16);
    const GridField zeta = GridField::sample(g, [](double, double y) { return std::sin(two_pi * y) / two_pi; });
    const TransportMap m = symplectic_flow({zeta}, constant_potential(g, 0.0), 64);
    for (int i = 0; i < g.n(); ++i) {
        for (int j = 0; j < g.n(); ++j) {
            EXPECT_NEAR(m.displacement_x(i, j), -std::cos(two_pi * g.coord(j)), 1e-10);
            EXPECT_NEAR(m.displacement_y(i, j), 0.0, 1e-12);
        }
    }
}

TEST(SymplecticFlow, PreservesMeasureUnderRefinement) {
    double previous = 1e300;
    for (int n : {16, 32}) {
        const Grid g(n);
        std::mt19937_64 rng(12);
        const GridField zeta = random_band_limited(g, 1, rng) * 0.02;
        const Potential u = standard_a(g);
        const TransportMap m = symplectic_flow({zeta}, u, 2 * n);
        const GridField moved = pullback(u.ma_density(), m);
        double worst = 0.0;
        for (std::size_t k = 0; k < moved.size(); ++k) {
            worst = std::max(worst, std::abs(moved[k] * m.jacobian[k] - u.ma_density()[k]));
        }
        EXPECT_LT(worst, previous);
        EXPECT_LE(worst, 2e-2);
        previous = worst;
    }
}

TEST(CompositionScheme, AutonomousAndConvergent) {
    const Grid g(16);
    const Potential u = standard_a(g);
    std::mt19937_64 rng(21);
    const GridField z0 = random_band_limited(g, 1, rng) * 0.02;
    const GridField z1 = random_band_limited(g, 1, rng) * 0.02;
    const HamiltonianFamily still = [&](double) { return z0; };
    EXPECT_LE(map_distance(composition_scheme(still, u, 4, 8), hamiltonian_flow(still, u, 32)), 1e-8);
    const HamiltonianFamily moving = [&](double s) { return z0 * std::cos(3.0 * s) + z1 * std::sin(3.0 * s); };
    const TransportMap reference = hamiltonian_flow(moving, u, 256);
    const double e8 = map_distance(composition_scheme(moving, u, 8, 8), reference);
    const double e32 = map_distance(composition_scheme(moving, u, 32, 2), reference);
    EXPECT_LT(e32, e8);
    EXPECT_THROW(composition_scheme(moving, u, 0, 2), std::invalid_argument);
}

TEST(IntegratePoints, ThrowsWhenStepTooLarge) {
    const Grid g(16);
    const GridField zeta = GridField::sample(g, [](double, double y) { return std::sin(two_pi * y) / two_pi; });
    EXPECT_THROW(symplectic_flow({zeta}, constant_potential(g, 0.0), 2), StepUnstable);
}
