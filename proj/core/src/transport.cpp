#include "mal/transport.hpp"

#include "mal/error.hpp"
#include "mal/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mal {

namespace {

using VelocityAt = std::function<VectorField(double)>;

double wrap_unit(double v) {
    const double w = v - std::floor(v);
    return w >= 1.0 ? 0.0 : w;
}

// Signed torus difference reduced to [-1/2, 1/2).
double torus_delta(double d) { return d - std::floor(d + 0.5); }

std::vector<double> node_x(const Grid& grid) {
    std::vector<double> xs(grid.size());
    for (int i = 0; i < grid.n(); ++i) {
        for (int j = 0; j < grid.n(); ++j) xs[grid.index(i, j)] = grid.coord(i);
    }
    return xs;
}

std::vector<double> node_y(const Grid& grid) {
    std::vector<double> ys(grid.size());
    for (int i = 0; i < grid.n(); ++i) {
        for (int j = 0; j < grid.n(); ++j) ys[grid.index(i, j)] = grid.coord(j);
    }
    return ys;
}

// Classical four-stage integration of every point from t0 to t1 in `steps`
// equal steps (t1 < t0 integrates backwards). Positions stay unwrapped.
void integrate_points(const Grid& grid, std::vector<double>& xs, std::vector<double>& ys, double t0, double t1,
                      int steps, const VelocityAt& velocity_at) {
    if (steps < 1) throw std::invalid_argument("substeps must be >= 1");
    const double h = (t1 - t0) / steps;
    const double limit = grid.cell_width();
    const std::size_t count = xs.size();
    for (int s = 0; s < steps; ++s) {
        const double t = t0 + s * h;
        const VectorField v0 = velocity_at(t);
        const VectorField vm = velocity_at(t + 0.5 * h);
        const VectorField v1 = velocity_at(s + 1 == steps ? t1 : t + h);
        parallel_for(count, [&](std::size_t begin, std::size_t end) {
            for (std::size_t k = begin; k < end; ++k) {
                const double x = xs[k];
                const double y = ys[k];
                const double k1x = sample_bilinear(v0.x, x, y);
                const double k1y = sample_bilinear(v0.y, x, y);
                const double k2x = sample_bilinear(vm.x, x + 0.5 * h * k1x, y + 0.5 * h * k1y);
                const double k2y = sample_bilinear(vm.y, x + 0.5 * h * k1x, y + 0.5 * h * k1y);
                const double k3x = sample_bilinear(vm.x, x + 0.5 * h * k2x, y + 0.5 * h * k2y);
                const double k3y = sample_bilinear(vm.y, x + 0.5 * h * k2x, y + 0.5 * h * k2y);
                const double k4x = sample_bilinear(v1.x, x + h * k3x, y + h * k3y);
                const double k4y = sample_bilinear(v1.y, x + h * k3x, y + h * k3y);
                const double dx = h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
                const double dy = h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
                const double moved = std::hypot(dx, dy);
                if (moved > limit) throw StepUnstable(moved, limit);
                xs[k] = x + dx;
                ys[k] = y + dy;
            }
        });
    }
}

VectorField scaled_by_inverse(const VectorField& g, const GridField& rho, double factor) {
    VectorField out{GridField(g.x.grid()), GridField(g.x.grid())};
    for (std::size_t k = 0; k < rho.size(); ++k) {
        out.x[k] = factor * g.x[k] / rho[k];
        out.y[k] = factor * g.y[k] / rho[k];
    }
    return out;
}

VectorField lerp(const VectorField& a, const VectorField& b, double s) {
    return {mal::lerp(a.x, b.x, s), mal::lerp(a.y, b.y, s)};
}

// -1/2 grad u'/rho on [t_i, t_{i+1}] for the given path.
class TransportVelocity {
public:
    explicit TransportVelocity(const PotentialPath& path) : path_(path), velocity_(velocity(path)) {
        if (path.interpolation() == Interpolation::piecewise_linear) {
            for (const auto& v : velocity_.values) gradients_.push_back(gradient(v));
        } else {
            for (std::size_t i = 0; i < path.size(); ++i) {
                knot_fields_.push_back(scaled_by_inverse(gradient(velocity_.values[i]), path.knot(i).ma_density(), -0.5));
            }
        }
    }

    VelocityAt on_interval(std::size_t i) const {
        const double t0 = path_.times()[i];
        const double t1 = path_.times()[i + 1];
        return [this, i, t0, t1](double t) {
            const double s = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
            if (path_.interpolation() == Interpolation::piecewise_linear) {
                // rho is affine in u, hence exact along a linear segment.
                const GridField rho =
                    mal::lerp(path_.knot(i).ma_density(), path_.knot(i + 1).ma_density(), s);
                return scaled_by_inverse(gradients_[i], rho, -0.5);
            }
            return lerp(knot_fields_[i], knot_fields_[i + 1], s);
        };
    }

private:
    const PotentialPath& path_;
    PathVelocity velocity_;
    std::vector<VectorField> gradients_;
    std::vector<VectorField> knot_fields_;
};

GridField combine3(const GridField& a, double ca, const GridField& b, double cb, const GridField& c, double cc) {
    GridField out(a.grid());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = ca * a[k] + cb * b[k] + cc * c[k];
    return out;
}

GridField difference_quotient(const GridField& a, const GridField& b, double dt) {
    GridField out(a.grid());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (b[k] - a[k]) / dt;
    return out;
}

}  // namespace

PotentialPath::PotentialPath(std::vector<double> times, std::vector<Potential> knots, Interpolation interpolation)
    : times_(std::move(times)), knots_(std::move(knots)), interpolation_(interpolation) {
    if (knots_.size() < 2 || times_.size() != knots_.size()) {
        throw std::invalid_argument("a path needs at least two knots and one time per knot");
    }
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (!std::isfinite(times_[i])) throw std::invalid_argument("path times must be finite");
        if (i > 0 && !(times_[i] > times_[i - 1])) throw std::invalid_argument("path times must increase strictly");
        if (!(knots_[i].grid() == knots_.front().grid())) throw std::invalid_argument("path knots must share one grid");
    }
    if (interpolation_ == Interpolation::piecewise_linear) {
        for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
            make_potential(mal::lerp(knots_[i].field(), knots_[i + 1].field(), 0.5));
        }
    }
}

Potential PotentialPath::at(double t) const {
    if (t <= times_.front()) return knots_.front();
    if (t >= times_.back()) return knots_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
    if (t == times_[i]) return knots_[i];
    const double s = (t - times_[i]) / (times_[i + 1] - times_[i]);
    return make_potential(mal::lerp(knots_[i].field(), knots_[i + 1].field(), s));
}

PotentialPath PotentialPath::reversed() const {
    std::vector<Potential> knots(knots_.rbegin(), knots_.rend());
    return PotentialPath(times_, std::move(knots), interpolation_);
}

const GridField& PathVelocity::at_knot(std::size_t i) const {
    if (interpolation == Interpolation::piecewise_linear) return values.at(std::min(i, values.size() - 1));
    return values.at(i);
}

std::vector<GridField> knot_derivative(std::span<const double> t, const std::vector<GridField>& f) {
    if (t.size() != f.size() || f.size() < 2) throw std::invalid_argument("knot_derivative needs matching knots");
    const std::size_t m = f.size() - 1;
    std::vector<GridField> out;
    out.reserve(f.size());
    if (m == 1) {
        const GridField d = difference_quotient(f[0], f[1], t[1] - t[0]);
        return {d, d};
    }
    {
        const double h1 = t[1] - t[0];
        const double h2 = t[2] - t[1];
        out.push_back(combine3(f[0], -(2.0 * h1 + h2) / (h1 * (h1 + h2)), f[1], (h1 + h2) / (h1 * h2), f[2],
                               -h1 / (h2 * (h1 + h2))));
    }
    for (std::size_t i = 1; i < m; ++i) {
        const double h1 = t[i] - t[i - 1];
        const double h2 = t[i + 1] - t[i];
        out.push_back(combine3(f[i - 1], -h2 / (h1 * (h1 + h2)), f[i], (h2 - h1) / (h1 * h2), f[i + 1],
                               h1 / (h2 * (h1 + h2))));
    }
    {
        const double h1 = t[m - 1] - t[m - 2];
        const double h2 = t[m] - t[m - 1];
        out.push_back(combine3(f[m - 2], h2 / (h1 * (h1 + h2)), f[m - 1], -(h1 + h2) / (h1 * h2), f[m],
                               (2.0 * h2 + h1) / (h2 * (h1 + h2))));
    }
    return out;
}

PathVelocity velocity(const PotentialPath& path) {
    PathVelocity v{path.interpolation(), {}};
    const auto t = path.times();
    if (path.interpolation() == Interpolation::piecewise_linear) {
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            v.values.push_back(difference_quotient(path.knot(i).field(), path.knot(i + 1).field(), t[i + 1] - t[i]));
        }
    } else {
        std::vector<GridField> fields;
        fields.reserve(path.size());
        for (const auto& k : path.knots()) fields.push_back(k.field());
        v.values = knot_derivative(t, fields);
    }
    return v;
}

TransportMap TransportMap::identity(const Grid& grid) {
    return {GridField(grid), GridField(grid), GridField(grid, 1.0)};
}

TransportMap TransportMap::from_positions(const Grid& grid, const std::vector<double>& xs,
                                          const std::vector<double>& ys) {
    const std::vector<double> x0 = node_x(grid);
    const std::vector<double> y0 = node_y(grid);
    GridField dx(grid);
    GridField dy(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        dx[k] = xs[k] - x0[k];
        dy[k] = ys[k] - y0[k];
    }
    const GridField dxx = partial_x(dx);
    const GridField dxy = partial_y(dx);
    const GridField dyx = partial_x(dy);
    const GridField dyy = partial_y(dy);
    GridField jac(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) jac[k] = (1.0 + dxx[k]) * (1.0 + dyy[k]) - dxy[k] * dyx[k];
    return {std::move(dx), std::move(dy), std::move(jac)};
}

bool TransportMap::is_identity() const {
    const auto zero = [](double v) { return v == 0.0; };
    return std::all_of(displacement_x.values().begin(), displacement_x.values().end(), zero) &&
           std::all_of(displacement_y.values().begin(), displacement_y.values().end(), zero);
}

std::vector<double> TransportMap::target_x() const {
    std::vector<double> xs = node_x(grid());
    for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = wrap_unit(xs[k] + displacement_x[k]);
    return xs;
}

std::vector<double> TransportMap::target_y() const {
    std::vector<double> ys = node_y(grid());
    for (std::size_t k = 0; k < ys.size(); ++k) ys[k] = wrap_unit(ys[k] + displacement_y[k]);
    return ys;
}

double map_distance(const TransportMap& a, const TransportMap& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("maps live on different grids");
    double worst = 0.0;
    for (std::size_t k = 0; k < a.grid().size(); ++k) {
        const double dx = torus_delta(a.displacement_x[k] - b.displacement_x[k]);
        const double dy = torus_delta(a.displacement_y[k] - b.displacement_y[k]);
        worst = std::max(worst, std::hypot(dx, dy));
    }
    return worst;
}

std::vector<TransportMap> transport_flow(const PotentialPath& path, int substeps) {
    const Grid& grid = path.grid();
    const TransportVelocity field(path);
    std::vector<double> xs = node_x(grid);
    std::vector<double> ys = node_y(grid);
    std::vector<TransportMap> maps;
    maps.reserve(path.size());
    maps.push_back(TransportMap::identity(grid));
    const auto t = path.times();
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        integrate_points(grid, xs, ys, t[i], t[i + 1], substeps, field.on_interval(i));
        maps.push_back(TransportMap::from_positions(grid, xs, ys));
    }
    return maps;
}

std::vector<TransportMap> inverse_transport_flow(const PotentialPath& path, int substeps) {
    const Grid& grid = path.grid();
    const TransportVelocity field(path);
    const auto t = path.times();
    std::vector<TransportMap> maps;
    maps.reserve(path.size());
    maps.push_back(TransportMap::identity(grid));
    for (std::size_t i = 1; i < path.size(); ++i) {
        std::vector<double> xs = node_x(grid);
        std::vector<double> ys = node_y(grid);
        for (std::size_t j = i; j-- > 0;) integrate_points(grid, xs, ys, t[j + 1], t[j], substeps, field.on_interval(j));
        maps.push_back(TransportMap::from_positions(grid, xs, ys));
    }
    return maps;
}

GridField pullback(const GridField& xi, const TransportMap& phi) {
    if (!(xi.grid() == phi.grid())) throw std::invalid_argument("field and map live on different grids");
    if (phi.is_identity()) return xi;
    return interpolate_at(xi, phi.target_x(), phi.target_y());
}

std::vector<double> pullback_density_residual(const PotentialPath& path, const std::vector<TransportMap>& maps) {
    if (maps.size() != path.size()) throw std::invalid_argument("one map per knot is required");
    const GridField& rho0 = path.knot(0).ma_density();
    std::vector<double> out;
    out.reserve(maps.size());
    for (std::size_t i = 0; i < maps.size(); ++i) {
        const GridField moved = pullback(path.knot(i).ma_density(), maps[i]);
        double worst = 0.0;
        for (std::size_t k = 0; k < moved.size(); ++k) {
            worst = std::max(worst, std::abs(moved[k] * maps[i].jacobian[k] - rho0[k]));
        }
        out.push_back(worst);
    }
    return out;
}

std::vector<GridField> covariant_derivative(const PotentialPath& path, const std::vector<GridField>& field) {
    if (field.size() != path.size()) throw std::invalid_argument("one field per knot is required");
    const PathVelocity v = velocity(path);
    const auto t = path.times();
    std::vector<GridField> rate;
    if (path.interpolation() == Interpolation::piecewise_linear) {
        for (std::size_t i = 0; i + 1 < field.size(); ++i) {
            rate.push_back(difference_quotient(field[i], field[i + 1], t[i + 1] - t[i]));
        }
        rate.push_back(rate.back());
    } else {
        rate = knot_derivative(t, field);
    }
    std::vector<GridField> out;
    out.reserve(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) {
        GridField d = rate[i];
        d -= 0.5 * inner_product_du(path.knot(i), v.at_knot(i), field[i]);
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<GridField> parallel_transport(const PotentialPath& path, const GridField& eta, int substeps) {
    const std::vector<TransportMap> inverse = inverse_transport_flow(path, substeps);
    std::vector<GridField> out;
    out.reserve(inverse.size());
    for (const auto& psi : inverse) out.push_back(pullback(eta, psi));
    return out;
}

VectorField symplectic_gradient(const Potential& u, const GridField& zeta) {
    const VectorField g = gradient(zeta);
    const GridField& rho = u.ma_density();
    VectorField out{GridField(zeta.grid()), GridField(zeta.grid())};
    for (std::size_t k = 0; k < rho.size(); ++k) {
        out.x[k] = -g.y[k] / rho[k];
        out.y[k] = g.x[k] / rho[k];
    }
    return out;
}

TransportMap symplectic_flow(const std::vector<GridField>& zeta, const Potential& u, int substeps) {
    if (zeta.empty()) throw std::invalid_argument("symplectic_flow needs at least one Hamiltonian sample");
    std::vector<VectorField> fields;
    fields.reserve(zeta.size());
    for (const auto& z : zeta) fields.push_back(symplectic_gradient(u, z));
    const Grid& grid = u.grid();
    std::vector<double> xs = node_x(grid);
    std::vector<double> ys = node_y(grid);
    const std::size_t last = fields.size() - 1;
    integrate_points(grid, xs, ys, 0.0, 1.0, substeps, [&](double t) {
        if (last == 0) return fields[0];
        const double pos = std::clamp(t, 0.0, 1.0) * static_cast<double>(last);
        const std::size_t j = std::min(static_cast<std::size_t>(pos), last - 1);
        return lerp(fields[j], fields[j + 1], pos - static_cast<double>(j));
    });
    return TransportMap::from_positions(grid, xs, ys);
}

TransportMap hamiltonian_flow(const HamiltonianFamily& zeta, const Potential& u, int substeps) {
    const Grid& grid = u.grid();
    std::vector<double> xs = node_x(grid);
    std::vector<double> ys = node_y(grid);
    integrate_points(grid, xs, ys, 0.0, 1.0, substeps, [&](double t) { return symplectic_gradient(u, zeta(t)); });
    return TransportMap::from_positions(grid, xs, ys);
}

TransportMap composition_scheme(const HamiltonianFamily& zeta, const Potential& u, int k, int substeps) {
    if (k < 1) throw std::invalid_argument("composition_scheme needs k >= 1");
    const Grid& grid = u.grid();
    std::vector<double> xs = node_x(grid);
    std::vector<double> ys = node_y(grid);
    for (int j = 0; j < k; ++j) {
        const double s = static_cast<double>(j) / k;
        const VectorField frozen = symplectic_gradient(u, zeta(s));
        integrate_points(grid, xs, ys, s, static_cast<double>(j + 1) / k, substeps,
                         [&](double) { return frozen; });
    }
    return TransportMap::from_positions(grid, xs, ys);
}

}  // namespace mal
