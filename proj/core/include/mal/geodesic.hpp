#pragma once

// epsilon-geodesics as solutions of the space-time boundary value problem
//   rho_u * D_t^2 u - 1/2 |grad D_t u|^2 = eps,   u(a) = u_a, u(b) = u_b,
// with centered time differences on a uniform time grid, weak geodesics as
// eps -> 0 continuation limits, and Jacobi fields by endpoint differencing.

#include "mal/grid.hpp"
#include "mal/transport.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace mal {

struct EpsGeodesicProblem {
    Potential endpoint_a;
    Potential endpoint_b;
    double a = 0.0;
    double b = 1.0;
    double epsilon = 0.1;
    int time_steps = 32;
    double solver_tol = 1e-8;
    int max_iter = 50;

    /// Throws std::invalid_argument when eps < 0, m < 2, tol <= 0, b <= a or
    /// the endpoints live on different grids.
    void validate() const;
};

struct GeodesicSolution {
    /// Solver-native path with time_steps + 1 uniform knots.
    PotentialPath path;
    /// sup over interior nodes of |D_t^2 u - 1/2 |grad D_t u|^2 / rho - eps / rho|.
    double residual_norm;
    double epsilon;
    int iterations;
    std::vector<double> residual_history;
};

/// Damped Newton on the space-time system. Each Newton system is scaled by
/// 1/rho and solved by GMRES, preconditioned by the exact inverse of
/// D_t^2 + a Lap with a the mean diffusion coefficient (one tridiagonal solve
/// in time per spatial Fourier mode). The default starting guess is the linear
/// interpolant plus eps (t - a)(t - b)/2; `initial` (one field per knot,
/// endpoints ignored) replaces it.
/// Throws NonConvergence after max_iter iterations and PositivityLoss when 30
/// step halvings cannot keep the iterate inside the potentials.
GeodesicSolution solve_epsilon_geodesic(const EpsGeodesicProblem& p,
                                        const std::optional<std::vector<GridField>>& initial = std::nullopt);

struct WeakGeodesicOptions {
    double a = 0.0;
    double b = 1.0;
    /// Stop once successive eps-solutions are closer than tol in sup norm.
    double tol = 1e-5;
    int time_steps = 32;
    double solver_tol = 1e-8;
    int max_iter = 50;
    double epsilon0 = 1.0;
    /// Continuation keeps halving until eps <= max_final_epsilon, even when
    /// successive solutions are already close.
    double max_final_epsilon = 1e-4;
    /// Gives up (NonConvergence) when eps falls below this without meeting tol.
    double min_epsilon = 1e-12;
};

struct WeakGeodesic {
    PotentialPath path;
    double final_epsilon;
    std::vector<double> epsilons;
    /// Sup distance between consecutive solutions (one fewer than epsilons).
    std::vector<double> successive_distances;
    double residual_norm;
    /// Newton iterations and residual history of each eps-stage, in order.
    std::vector<int> iterations;
    std::vector<std::vector<double>> residual_histories;
};

WeakGeodesic weak_geodesic(const Potential& u_a, const Potential& u_b, const WeakGeodesicOptions& options);

/// c(t_k, x) = rho_u D_t^2 u - 1/2 |grad D_t u|^2 at every interior knot
/// (three-point differences, valid for non-uniform times).
std::vector<GridField> hcma_residual(const PotentialPath& path);

/// xi(t_i) = (u^{+delta} - u^{-delta}) / (2 delta) for the problems with
/// endpoints u_a +- delta dir_a and u_b +- delta dir_b. Throws
/// PerturbationTooLarge when a perturbed endpoint is not a potential.
std::vector<GridField> jacobi_field(const EpsGeodesicProblem& p, const GridField& direction_a,
                                    const GridField& direction_b, double delta,
                                    const std::optional<GeodesicSolution>& base = std::nullopt);

/// Sup over the knots t_2 .. t_{m-2} (where both covariant differences are
/// centered) of
///   rho nabla_t^2 xi - 1/4 {{u', xi}, u'} rho + eps/2 div(F grad xi),
/// where nabla_t xi = xi' - 1/2 (d u', d xi)_u is applied twice.
double jacobi_residual(const GeodesicSolution& sol, const std::vector<GridField>& xi);

struct MonotoneLimitReport {
    /// Per sequence step j >= 1: sup of (v_j - v_{j-1})_+ over knots and cells.
    std::vector<double> monotonicity_violations;
    /// Per j: sup of (v - v_j)_+, i.e. the limit exceeding a member.
    std::vector<double> limit_violations;
    /// Per j: sup |v_j - v|.
    std::vector<double> distances;
    double worst_violation;
    double final_distance;
};

/// Weak geodesics for each endpoint pair of the decreasing sequences and for
/// the limit pair, compared knot by knot.
MonotoneLimitReport monotone_limit_check(const std::vector<Potential>& u_a_seq, const std::vector<Potential>& u_b_seq,
                                         const Potential& u_a, const Potential& u_b,
                                         const WeakGeodesicOptions& options);

/// Endpoint sequences decreasing to (w, w_prime): the j-th members are
/// w + 2^-(j+1) (1 + k phi) and w_prime + 2^-(j+1) (1 + k phi), j = 1..count,
/// with phi a seeded band-limited field and |k phi| <= 1/2.
std::pair<std::vector<Potential>, std::vector<Potential>> decreasing_sequences(const Potential& w,
                                                                               const Potential& w_prime, int count,
                                                                               std::uint64_t seed);

/// Sup distance over knots and cells between two paths on the same knots.
double path_distance(const PotentialPath& a, const PotentialPath& b);

}  // namespace mal
