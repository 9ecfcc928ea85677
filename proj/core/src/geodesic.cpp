#include "mal/geodesic.hpp"

#include "mal/error.hpp"
#include "mal/fields.hpp"

#include "spectrum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mal {

namespace {

using Vec = Eigen::VectorXd;

constexpr int max_halvings = 30;

GridField density_of(const GridField& u) {
    GridField rho = laplacian(u);
    rho *= 0.5;
    rho += 1.0;
    return rho;
}

// Everything the residual and its linearization need at one iterate.
struct SpaceTimeState {
    std::vector<GridField> u;      // all knots
    std::vector<GridField> rho;    // all knots
    std::vector<GridField> d2;     // interior knots: D_t^2 u
    std::vector<VectorField> gw;   // interior knots: grad of the centered velocity
    std::vector<GridField> g;      // interior knots: rho D_t^2 u - |gw|^2/2 - eps
    double residual = 0.0;         // sup |g / rho|
    double merit = 0.0;            // sup |g|, decreases along the Newton direction
    bool positive = true;
    std::size_t bad_knot = 0;
    std::size_t bad_cell = 0;
};

class SpaceTimeSystem {
public:
    SpaceTimeSystem(const Grid& grid, int m, double dt, double eps) : grid_(grid), m_(m), dt_(dt), eps_(eps) {}

    std::size_t cells() const { return grid_.size(); }
    std::size_t unknowns() const { return static_cast<std::size_t>(m_ - 1) * cells(); }

    SpaceTimeState evaluate(std::vector<GridField> u) const {
        SpaceTimeState s;
        s.u = std::move(u);
        s.rho.reserve(s.u.size());
        for (std::size_t k = 0; k < s.u.size(); ++k) {
            s.rho.push_back(density_of(s.u[k]));
            if (!s.positive) continue;
            for (std::size_t c = 0; c < cells(); ++c) {
                if (!(s.rho[k][c] > 0.0)) {
                    s.positive = false;
                    s.bad_knot = k;
                    s.bad_cell = c;
                    break;
                }
            }
        }
        if (!s.positive) return s;
        const double inv_dt2 = 1.0 / (dt_ * dt_);
        const double inv_2dt = 0.5 / dt_;
        for (int k = 1; k < m_; ++k) {
            GridField d2(grid_);
            GridField w(grid_);
            for (std::size_t c = 0; c < cells(); ++c) {
                d2[c] = (s.u[k + 1][c] - 2.0 * s.u[k][c] + s.u[k - 1][c]) * inv_dt2;
                w[c] = (s.u[k + 1][c] - s.u[k - 1][c]) * inv_2dt;
            }
            VectorField gw = gradient(w);
            GridField g(grid_);
            for (std::size_t c = 0; c < cells(); ++c) {
                g[c] = s.rho[k][c] * d2[c] - 0.5 * (gw.x[c] * gw.x[c] + gw.y[c] * gw.y[c]) - eps_;
                s.residual = std::max(s.residual, std::abs(g[c] / s.rho[k][c]));
                s.merit = std::max(s.merit, std::abs(g[c]));
            }
            s.d2.push_back(std::move(d2));
            s.gw.push_back(std::move(gw));
            s.g.push_back(std::move(g));
        }
        return s;
    }

    // -g / rho, the right-hand side of the scaled Newton system.
    Vec scaled_rhs(const SpaceTimeState& s) const {
        Vec out(static_cast<Eigen::Index>(unknowns()));
        for (int k = 1; k < m_; ++k) {
            for (std::size_t c = 0; c < cells(); ++c) out[index(k, c)] = -s.g[k - 1][c] / s.rho[k][c];
        }
        return out;
    }

    // Space-time mean of the Laplacian coefficient of the scaled Jacobian.
    double mean_diffusion(const SpaceTimeState& s) const {
        std::vector<double> terms;
        terms.reserve(unknowns());
        for (int k = 1; k < m_; ++k) {
            for (std::size_t c = 0; c < cells(); ++c) terms.push_back(0.5 * s.d2[k - 1][c] / s.rho[k][c]);
        }
        return std::max(0.0, compensated_sum(terms) / static_cast<double>(terms.size()));
    }

    // diag(1/rho) J v with the grid's own derivative scheme.
    Vec apply_scaled_jacobian(const SpaceTimeState& s, const Vec& v) const {
        std::vector<GridField> slice(m_ + 1, GridField(grid_));
        for (int k = 1; k < m_; ++k) {
            for (std::size_t c = 0; c < cells(); ++c) slice[k][c] = v[index(k, c)];
        }
        Vec out(v.size());
        const double inv_dt2 = 1.0 / (dt_ * dt_);
        const double inv_2dt = 0.5 / dt_;
        for (int k = 1; k < m_; ++k) {
            const GridField lap = laplacian(slice[k]);
            const VectorField gd = gradient(slice[k + 1] - slice[k - 1]);
            const GridField& rho = s.rho[k];
            const GridField& d2 = s.d2[k - 1];
            const VectorField& gw = s.gw[k - 1];
            for (std::size_t c = 0; c < cells(); ++c) {
                out[index(k, c)] = (slice[k + 1][c] - 2.0 * slice[k][c] + slice[k - 1][c]) * inv_dt2 +
                                   (0.5 * d2[c] * lap[c] - inv_2dt * (gw.x[c] * gd.x[c] + gw.y[c] * gd.y[c])) / rho[c];
            }
        }
        return out;
    }

    std::vector<GridField> step(const SpaceTimeState& s, const Vec& dx, double alpha) const {
        std::vector<GridField> u = s.u;
        for (int k = 1; k < m_; ++k) {
            for (std::size_t c = 0; c < cells(); ++c) u[k][c] += alpha * dx[index(k, c)];
        }
        return u;
    }

    std::size_t index(int k, std::size_t c) const { return static_cast<std::size_t>(k - 1) * cells() + c; }

private:

    Grid grid_;
    int m_;
    double dt_;
    double eps_;
};

// Exact inverse of D_t^2 + abar * Lap (Dirichlet in time, periodic in space):
// each spatial Fourier mode decouples into a tridiagonal system in time.
class ModalPreconditioner {
public:
    ModalPreconditioner(const Grid& grid, int m, double dt, double abar) : grid_(grid), interior_(m - 1) {
        const int n = grid.n();
        const int half = n / 2 + 1;
        modes_ = static_cast<std::size_t>(n) * half;
        const double off = 1.0 / (dt * dt);
        inv_denom_.resize(modes_ * interior_);
        upper_.resize(modes_ * interior_);
        for (int i = 0; i < n; ++i) {
            const int kx = detail::signed_wavenumber(i, n);
            for (int j = 0; j < half; ++j) {
                const double symbol = laplacian_symbol(kx, j, n, grid.scheme());
                const double diag = -2.0 * off + abar * symbol;
                const std::size_t mode = static_cast<std::size_t>(i) * half + j;
                double prev_upper = 0.0;
                for (std::size_t k = 0; k < interior_; ++k) {
                    const double denom = diag - (k == 0 ? 0.0 : off * prev_upper);
                    inv_denom_[mode * interior_ + k] = 1.0 / denom;
                    prev_upper = off / denom;
                    upper_[mode * interior_ + k] = prev_upper;
                }
            }
        }
        off_ = off;
    }

    Vec apply(const Vec& r) const {
        const std::size_t cells = grid_.size();
        std::vector<detail::Spectrum> spectra;
        spectra.reserve(interior_);
        for (std::size_t k = 0; k < interior_; ++k) {
            GridField slice(grid_);
            for (std::size_t c = 0; c < cells; ++c) slice[c] = r[static_cast<Eigen::Index>(k * cells + c)];
            spectra.push_back(detail::forward_spectrum(slice));
        }
        for (std::size_t mode = 0; mode < modes_; ++mode) {
            const double* inv = &inv_denom_[mode * interior_];
            const double* up = &upper_[mode * interior_];
            std::complex<double> carry = 0.0;
            for (std::size_t k = 0; k < interior_; ++k) {
                carry = (spectra[k][mode] - off_ * carry) * inv[k];
                spectra[k][mode] = carry;
            }
            for (std::size_t k = interior_ - 1; k-- > 0;) spectra[k][mode] -= up[k] * spectra[k + 1][mode];
        }
        Vec out(r.size());
        for (std::size_t k = 0; k < interior_; ++k) {
            const GridField slice = detail::inverse_spectrum(grid_, spectra[k]);
            for (std::size_t c = 0; c < cells; ++c) out[static_cast<Eigen::Index>(k * cells + c)] = slice[c];
        }
        return out;
    }

private:
    static double laplacian_symbol(int kx, int ky, int n, DerivativeScheme scheme) {
        if (scheme == DerivativeScheme::spectral) {
            return -4.0 * std::numbers::pi * std::numbers::pi * (double(kx) * kx + double(ky) * ky);
        }
        const double sx = std::sin(std::numbers::pi * kx / n);
        const double sy = std::sin(std::numbers::pi * ky / n);
        return -4.0 * n * n * (sx * sx + sy * sy);
    }

    Grid grid_;
    std::size_t interior_;
    std::size_t modes_ = 0;
    double off_ = 0.0;
    std::vector<double> inv_denom_;
    std::vector<double> upper_;
};

// Restarted GMRES with right preconditioning; returns the iteration count.
template <typename Op, typename Prec>
int gmres(const Op& apply, const Prec& precondition, const Vec& b, Vec& x, double rtol, int restart, int max_iter) {
    const double bnorm = b.norm();
    x = Vec::Zero(b.size());
    if (bnorm == 0.0) return 0;
    int total = 0;
    Vec r = b;
    while (total < max_iter) {
        const double beta = r.norm();
        if (beta <= rtol * bnorm) break;
        const int dim = std::min(restart, max_iter - total);
        Eigen::MatrixXd v(b.size(), dim + 1);
        Eigen::MatrixXd z(b.size(), dim);
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim + 1, dim);
        Vec cs = Vec::Zero(dim);
        Vec sn = Vec::Zero(dim);
        Vec g = Vec::Zero(dim + 1);
        g[0] = beta;
        v.col(0) = r / beta;
        int used = 0;
        for (int j = 0; j < dim; ++j) {
            z.col(j) = precondition(v.col(j));
            Vec w = apply(z.col(j));
            for (int i = 0; i <= j; ++i) {
                hess(i, j) = w.dot(v.col(i));
                w -= hess(i, j) * v.col(i);
            }
            hess(j + 1, j) = w.norm();
            if (hess(j + 1, j) > 0.0) v.col(j + 1) = w / hess(j + 1, j);
            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * hess(i, j) + sn[i] * hess(i + 1, j);
                hess(i + 1, j) = -sn[i] * hess(i, j) + cs[i] * hess(i + 1, j);
                hess(i, j) = t;
            }
            const double denom = std::hypot(hess(j, j), hess(j + 1, j));
            cs[j] = hess(j, j) / denom;
            sn[j] = hess(j + 1, j) / denom;
            hess(j, j) = denom;
            hess(j + 1, j) = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            ++used;
            ++total;
            if (std::abs(g[j + 1]) <= rtol * bnorm || hess(j, j) == 0.0) break;
        }
        const Vec y = hess.topLeftCorner(used, used).triangularView<Eigen::Upper>().solve(g.head(used));
        x += z.leftCols(used) * y;
        r = b - apply(x);
    }
    return total;
}

std::vector<double> uniform_times(double a, double b, int m) {
    std::vector<double> t(static_cast<std::size_t>(m) + 1);
    for (int k = 0; k <= m; ++k) t[k] = a + (b - a) * static_cast<double>(k) / m;
    t.back() = b;
    return t;
}

}  // namespace

void EpsGeodesicProblem::validate() const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be >= 0");
    if (time_steps < 2) throw std::invalid_argument("time_steps must be >= 2");
    if (!(solver_tol > 0.0)) throw std::invalid_argument("solver_tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(b > a)) throw std::invalid_argument("interval must satisfy a < b");
    if (!(endpoint_a.grid() == endpoint_b.grid())) throw std::invalid_argument("endpoints live on different grids");
}

GeodesicSolution solve_epsilon_geodesic(const EpsGeodesicProblem& p, const std::optional<std::vector<GridField>>& initial) {
    p.validate();
    if (!(p.epsilon > 0.0)) throw std::invalid_argument("the solver needs epsilon > 0");
    const Grid& grid = p.endpoint_a.grid();
    const int m = p.time_steps;
    const std::vector<double> times = uniform_times(p.a, p.b, m);
    const double dt = (p.b - p.a) / m;
    const SpaceTimeSystem system(grid, m, dt, p.epsilon);

    std::vector<GridField> u;
    u.reserve(static_cast<std::size_t>(m) + 1);
    if (initial) {
        if (initial->size() != static_cast<std::size_t>(m) + 1) {
            throw std::invalid_argument("initial guess needs one field per knot");
        }
        u = *initial;
        u.front() = p.endpoint_a.field();
        u.back() = p.endpoint_b.field();
    } else {
        // Linear interpolant plus the spatially constant eps-correction, which
        // already solves the problem for constant endpoints.
        for (int k = 0; k <= m; ++k) {
            GridField guess = lerp(p.endpoint_a.field(), p.endpoint_b.field(), double(k) / m);
            guess += 0.5 * p.epsilon * (times[k] - p.a) * (times[k] - p.b);
            u.push_back(std::move(guess));
        }
    }
    u.front() = p.endpoint_a.field();
    u.back() = p.endpoint_b.field();

    SpaceTimeState state = system.evaluate(std::move(u));
    if (!state.positive) throw PositivityLoss(state.bad_knot, state.bad_cell);
    std::vector<double> history{state.residual};

    int iterations = 0;
    while (state.residual > p.solver_tol) {
        if (iterations >= p.max_iter) throw NonConvergence(iterations, state.residual);
        const ModalPreconditioner preconditioner(grid, m, dt, system.mean_diffusion(state));
        const Vec rhs = system.scaled_rhs(state);
        Vec dx;
        const auto apply = [&](const Vec& v) { return system.apply_scaled_jacobian(state, v); };
        const auto precondition = [&](const Vec& v) { return preconditioner.apply(v); };
        gmres(apply, precondition, rhs, dx, 1e-10, 80, 400);

        double alpha = 1.0;
        bool accepted = false;
        bool positivity_failed = false;
        std::size_t bad_knot = 0;
        std::size_t bad_cell = 0;
        for (int halving = 0; halving <= max_halvings; ++halving) {
            SpaceTimeState trial = system.evaluate(system.step(state, dx, alpha));
            if (!trial.positive) {
                positivity_failed = true;
                bad_knot = trial.bad_knot;
                bad_cell = trial.bad_cell;
            } else if (trial.merit < state.merit) {
                state = std::move(trial);
                accepted = true;
                break;
            } else {
                positivity_failed = false;
            }
            alpha *= 0.5;
        }
        ++iterations;
        if (!accepted) {
            if (positivity_failed) throw PositivityLoss(bad_knot, bad_cell);
            throw NonConvergence(iterations, state.residual);
        }
        history.push_back(state.residual);
    }

    std::vector<Potential> knots;
    knots.reserve(state.u.size());
    knots.push_back(p.endpoint_a);
    for (int k = 1; k < m; ++k) knots.push_back(make_potential(std::move(state.u[k])));
    knots.push_back(p.endpoint_b);
    return {PotentialPath(times, std::move(knots), Interpolation::solver_native), state.residual, p.epsilon, iterations,
            std::move(history)};
}

double path_distance(const PotentialPath& a, const PotentialPath& b) {
    if (a.size() != b.size()) throw std::invalid_argument("paths have different knot counts");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, sup_distance(a.knot(i).field(), b.knot(i).field()));
    return worst;
}

WeakGeodesic weak_geodesic(const Potential& u_a, const Potential& u_b, const WeakGeodesicOptions& options) {
    if (!(options.tol > 0.0)) throw std::invalid_argument("weak geodesic tolerance must be positive");
    if (!(options.epsilon0 > 0.0)) throw std::invalid_argument("initial epsilon must be positive");
    EpsGeodesicProblem problem{u_a, u_b, options.a, options.b, options.epsilon0, options.time_steps,
                               options.solver_tol, options.max_iter};
    std::vector<double> epsilons;
    std::vector<double> distances;
    std::vector<int> iterations;
    std::vector<std::vector<double>> histories;
    std::optional<GeodesicSolution> previous;
    while (true) {
        std::optional<std::vector<GridField>> warm;
        if (previous) {
            warm.emplace();
            for (const auto& k : previous->path.knots()) warm->push_back(k.field());
        }
        GeodesicSolution sol = solve_epsilon_geodesic(problem, warm);
        epsilons.push_back(problem.epsilon);
        iterations.push_back(sol.iterations);
        histories.push_back(sol.residual_history);
        if (previous) {
            distances.push_back(path_distance(previous->path, sol.path));
            if (distances.back() < options.tol && problem.epsilon <= options.max_final_epsilon) {
                return {std::move(sol.path), problem.epsilon, std::move(epsilons), std::move(distances),
                        sol.residual_norm, std::move(iterations), std::move(histories)};
            }
        }
        previous = std::move(sol);
        problem.epsilon *= 0.5;
        if (problem.epsilon < options.min_epsilon) {
            throw NonConvergence(static_cast<int>(epsilons.size()), distances.empty() ? 0.0 : distances.back());
        }
    }
}

std::vector<GridField> hcma_residual(const PotentialPath& path) {
    if (path.size() < 3) throw std::invalid_argument("hcma_residual needs at least three knots");
    const auto t = path.times();
    std::vector<GridField> out;
    for (std::size_t k = 1; k + 1 < path.size(); ++k) {
        const double h1 = t[k] - t[k - 1];
        const double h2 = t[k + 1] - t[k];
        const GridField& um = path.knot(k - 1).field();
        const GridField& u0 = path.knot(k).field();
        const GridField& up = path.knot(k + 1).field();
        GridField w(path.grid());
        GridField d2(path.grid());
        for (std::size_t c = 0; c < w.size(); ++c) {
            w[c] = -h2 / (h1 * (h1 + h2)) * um[c] + (h2 - h1) / (h1 * h2) * u0[c] + h1 / (h2 * (h1 + h2)) * up[c];
            d2[c] = 2.0 * ((up[c] - u0[c]) / h2 - (u0[c] - um[c]) / h1) / (h1 + h2);
        }
        const VectorField gw = gradient(w);
        const GridField& rho = path.knot(k).ma_density();
        GridField c(path.grid());
        for (std::size_t q = 0; q < c.size(); ++q) {
            c[q] = rho[q] * d2[q] - 0.5 * (gw.x[q] * gw.x[q] + gw.y[q] * gw.y[q]);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<GridField> jacobi_field(const EpsGeodesicProblem& p, const GridField& direction_a,
                                    const GridField& direction_b, double delta,
                                    const std::optional<GeodesicSolution>& base) {
    p.validate();
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    const auto perturbed = [&](const Potential& u, const GridField& dir, double sign) {
        try {
            return make_potential(u.field() + (sign * delta) * dir);
        } catch (const NotKahler&) {
            throw PerturbationTooLarge(delta);
        }
    };
    const int m = p.time_steps;
    std::vector<GridField> base_knots;
    if (base) {
        for (const auto& k : base->path.knots()) base_knots.push_back(k.field());
    } else {
        const GeodesicSolution sol = solve_epsilon_geodesic(p);
        for (const auto& k : sol.path.knots()) base_knots.push_back(k.field());
    }
    std::vector<std::vector<GridField>> family;
    for (double sign : {1.0, -1.0}) {
        EpsGeodesicProblem q = p;
        q.endpoint_a = perturbed(p.endpoint_a, direction_a, sign);
        q.endpoint_b = perturbed(p.endpoint_b, direction_b, sign);
        std::vector<GridField> warm = base_knots;
        for (int k = 0; k <= m; ++k) warm[k] += (sign * delta) * lerp(direction_a, direction_b, double(k) / m);
        const GeodesicSolution sol = solve_epsilon_geodesic(q, warm);
        std::vector<GridField> knots;
        for (const auto& k : sol.path.knots()) knots.push_back(k.field());
        family.push_back(std::move(knots));
    }
    std::vector<GridField> xi;
    xi.reserve(static_cast<std::size_t>(m) + 1);
    for (int k = 0; k <= m; ++k) {
        GridField d = family[0][k] - family[1][k];
        d *= 0.5 / delta;
        xi.push_back(std::move(d));
    }
    xi.front() = direction_a;
    xi.back() = direction_b;
    return xi;
}

double jacobi_residual(const GeodesicSolution& sol, const std::vector<GridField>& xi) {
    const PotentialPath& path = sol.path;
    if (xi.size() != path.size()) throw std::invalid_argument("one Jacobi field value per knot is required");
    if (path.size() < 5) throw std::invalid_argument("jacobi_residual needs at least four time steps");
    const bool zero = std::all_of(xi.begin(), xi.end(), [](const GridField& f) {
        return std::all_of(f.values().begin(), f.values().end(), [](double v) { return v == 0.0; });
    });
    if (zero) return 0.0;
    const std::vector<GridField> first = covariant_derivative(path, xi);
    const std::vector<GridField> second = covariant_derivative(path, first);
    const PathVelocity v = velocity(path);
    double worst = 0.0;
    // Knots whose two neighbors both carry centered first derivatives.
    for (std::size_t k = 2; k + 2 < path.size(); ++k) {
        const Potential& u = path.knot(k);
        const GridField& rho = u.ma_density();
        const GridField& ud = v.at_knot(k);
        const GridField bracket = poisson_bracket(u, poisson_bracket(u, ud, xi[k]), ud);
        const VectorField g = gradient(xi[k]);
        GridField fx(path.grid());
        GridField fy(path.grid());
        for (std::size_t c = 0; c < fx.size(); ++c) {
            fx[c] = g.x[c] / rho[c];
            fy[c] = g.y[c] / rho[c];
        }
        const GridField div = partial_x(fx) + partial_y(fy);
        for (std::size_t c = 0; c < rho.size(); ++c) {
            const double r = rho[c] * second[k][c] - 0.25 * bracket[c] * rho[c] + 0.5 * sol.epsilon * div[c];
            worst = std::max(worst, std::abs(r));
        }
    }
    return worst;
}

MonotoneLimitReport monotone_limit_check(const std::vector<Potential>& u_a_seq, const std::vector<Potential>& u_b_seq,
                                         const Potential& u_a, const Potential& u_b,
                                         const WeakGeodesicOptions& options) {
    if (u_a_seq.size() != u_b_seq.size() || u_a_seq.empty()) {
        throw std::invalid_argument("endpoint sequences must be non-empty and of equal length");
    }
    const WeakGeodesic limit = weak_geodesic(u_a, u_b, options);
    MonotoneLimitReport report{{}, {}, {}, 0.0, 0.0};
    std::optional<PotentialPath> previous;
    for (std::size_t j = 0; j < u_a_seq.size(); ++j) {
        const WeakGeodesic g = weak_geodesic(u_a_seq[j], u_b_seq[j], options);
        double above_limit = 0.0;
        for (std::size_t i = 0; i < g.path.size(); ++i) {
            const GridField& vj = g.path.knot(i).field();
            const GridField& v = limit.path.knot(i).field();
            for (std::size_t c = 0; c < vj.size(); ++c) above_limit = std::max(above_limit, v[c] - vj[c]);
        }
        report.limit_violations.push_back(above_limit);
        report.worst_violation = std::max(report.worst_violation, above_limit);
        if (previous) {
            double increase = 0.0;
            for (std::size_t i = 0; i < g.path.size(); ++i) {
                const GridField& vj = g.path.knot(i).field();
                const GridField& vp = previous->knot(i).field();
                for (std::size_t c = 0; c < vj.size(); ++c) increase = std::max(increase, vj[c] - vp[c]);
            }
            report.monotonicity_violations.push_back(increase);
            report.worst_violation = std::max(report.worst_violation, increase);
        }
        report.distances.push_back(path_distance(g.path, limit.path));
        previous = g.path;
    }
    report.final_distance = report.distances.back();
    return report;
}

std::pair<std::vector<Potential>, std::vector<Potential>> decreasing_sequences(const Potential& w,
                                                                               const Potential& w_prime, int count,
                                                                               std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sequence length must be >= 1");
    std::mt19937_64 rng(seed);
    const GridField phi = random_band_limited(w.grid(), 2, rng);
    // admissible_scale caps at 1/4 and phi has sup norm 1, so |k phi| <= 1/2.
    const double k = 2.0 * std::min(admissible_scale(w, phi, 0.5, 0.25), admissible_scale(w_prime, phi, 0.5, 0.25));
    const GridField shape = phi * k + 1.0;
    std::pair<std::vector<Potential>, std::vector<Potential>> out;
    for (int j = 1; j <= count; ++j) {
        const double c = std::ldexp(1.0, -j - 1);
        out.first.push_back(make_potential(w.field() + shape * c));
        out.second.push_back(make_potential(w_prime.field() + shape * c));
    }
    return out;
}

}  // namespace mal
