#pragma once

// Time-sampled paths of potentials, their velocities, and the flows that
// realize parallel transport: integrating -1/2 grad_{u(t)} u'(t) carries
// (X, mu_{u(0)}) onto (X, mu_{u(t)}), and a tangent vector xi at u(t) is
// transported back to u(0) as xi o phi(t).

#include "mal/grid.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace mal {

enum class Interpolation { piecewise_linear, solver_native };

class PotentialPath {
public:
    /// Requires >= 2 strictly increasing times, one knot per time, all on one
    /// grid. Piecewise-linear paths additionally admit the midpoint of every
    /// segment as a potential (NotKahler otherwise).
    PotentialPath(std::vector<double> times, std::vector<Potential> knots, Interpolation interpolation);

    std::span<const double> times() const noexcept { return times_; }
    const std::vector<Potential>& knots() const noexcept { return knots_; }
    const Potential& knot(std::size_t i) const { return knots_.at(i); }
    std::size_t size() const noexcept { return knots_.size(); }
    Interpolation interpolation() const noexcept { return interpolation_; }
    const Grid& grid() const noexcept { return knots_.front().grid(); }
    double start() const noexcept { return times_.front(); }
    double end() const noexcept { return times_.back(); }

    /// Linear interpolation between the bracketing knots.
    Potential at(double t) const;
    /// Same knots traversed backwards on the same time grid.
    PotentialPath reversed() const;

private:
    std::vector<double> times_;
    std::vector<Potential> knots_;
    Interpolation interpolation_;
};

/// Piecewise-linear paths: one field per interval (the right derivative at the
/// interval's left knot). Solver-native paths: one field per knot, second
/// order (centered inside, one-sided at the ends).
struct PathVelocity {
    Interpolation interpolation;
    std::vector<GridField> values;

    /// Velocity attached to knot i: interval i for piecewise-linear paths
    /// (the last knot reuses the final interval).
    const GridField& at_knot(std::size_t i) const;
};

PathVelocity velocity(const PotentialPath& path);

/// Second-order time derivative of per-knot fields sampled at `times`.
std::vector<GridField> knot_derivative(std::span<const double> times, const std::vector<GridField>& fields);

/// A map of the torus given by the (unwrapped) displacement of every node.
struct TransportMap {
    GridField displacement_x;
    GridField displacement_y;
    /// det of the discrete differential, same derivative scheme as the grid.
    GridField jacobian;

    static TransportMap identity(const Grid& grid);
    static TransportMap from_positions(const Grid& grid, const std::vector<double>& xs, const std::vector<double>& ys);

    const Grid& grid() const noexcept { return jacobian.grid(); }
    bool is_identity() const;
    /// Image coordinates of every node, reduced mod 1.
    std::vector<double> target_x() const;
    std::vector<double> target_y() const;
};

/// Largest torus distance between the images of the two maps.
double map_distance(const TransportMap& a, const TransportMap& b);

/// phi(t_i) for every knot, integrating -1/2 grad u'/rho with `substeps`
/// four-stage steps per knot interval. Throws StepUnstable when a substep
/// moves a node farther than one cell width.
std::vector<TransportMap> transport_flow(const PotentialPath& path, int substeps);

/// phi(t_i)^{-1} for every knot, by integrating the same field backwards.
std::vector<TransportMap> inverse_transport_flow(const PotentialPath& path, int substeps);

/// xi o phi, interpolated with the grid's scheme; identity maps return xi.
GridField pullback(const GridField& xi, const TransportMap& phi);

/// Sup over nodes of |rho_{u(t_i)}(phi(x)) J(x) - rho_{u(0)}(x)| per knot.
std::vector<double> pullback_density_residual(const PotentialPath& path, const std::vector<TransportMap>& maps);

/// xi' - 1/2 (d u', d xi)_u at every knot, differencing as in velocity().
std::vector<GridField> covariant_derivative(const PotentialPath& path, const std::vector<GridField>& field);

/// Field at every knot obtained by transporting eta (given at u(t_0)) along
/// the path: xi(t_i) = eta o phi(t_i)^{-1}.
std::vector<GridField> parallel_transport(const PotentialPath& path, const GridField& eta, int substeps);

/// sgrad zeta for the symplectic form rho_u dx^dy: (-d_y zeta, d_x zeta)/rho_u.
VectorField symplectic_gradient(const Potential& u, const GridField& zeta);

/// Time-1 map of sgrad zeta_t with zeta sampled at equally spaced times on
/// [0, 1] (linear in time between samples).
TransportMap symplectic_flow(const std::vector<GridField>& zeta, const Potential& u, int substeps);

using HamiltonianFamily = std::function<GridField(double)>;

/// Time-1 map of the time-dependent field sgrad zeta(s), evaluated exactly at
/// every stage time. Reference for composition_scheme.
TransportMap hamiltonian_flow(const HamiltonianFamily& zeta, const Potential& u, int substeps);

/// phi^{(k-1)/k}_{1/k} o ... o phi^0_{1/k}, where phi^s_t is the time-t flow
/// of the frozen field sgrad zeta(s). Each factor uses `substeps` stages of
/// the four-stage integrator; composition is applied pointwise to the nodes.
TransportMap composition_scheme(const HamiltonianFamily& zeta, const Potential& u, int k, int substeps);

}  // namespace mal
