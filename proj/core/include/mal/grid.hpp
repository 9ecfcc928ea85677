#pragma once

// Discretization of the flat torus R^2/Z^2 with the unit-mass form dx^dy on an
// N x N periodic grid, and the differential-geometric primitives that act on
// grid functions: Laplacian, Monge-Ampere density, metric gradient, cotangent
// inner product, Poisson bracket and the density F = 1/rho.

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace mal {

enum class DerivativeScheme { spectral, central_difference };

std::string_view to_string(DerivativeScheme scheme);
/// Accepts "spectral" and "central-difference" (or "fd").
DerivativeScheme parse_scheme(std::string_view text);

/// N x N periodic grid on the unit torus. Node (i, j) sits at (i/N, j/N);
/// i runs along x, j along y, storage is row-major in i.
class Grid {
public:
    /// Throws std::invalid_argument unless N >= 4 and N is even.
    explicit Grid(int n_cells_per_side, DerivativeScheme scheme = DerivativeScheme::spectral);

    int n() const noexcept { return n_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }
    double cell_width() const noexcept { return 1.0 / n_; }
    DerivativeScheme scheme() const noexcept { return scheme_; }
    double coord(int index) const noexcept { return static_cast<double>(index) / n_; }
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(wrap(i)) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(wrap(j));
    }
    int wrap(int i) const noexcept { return ((i % n_) + n_) % n_; }

    Grid with_scheme(DerivativeScheme scheme) const { return Grid(n_, scheme); }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int n_;
    DerivativeScheme scheme_;
};

/// Real function on the grid nodes.
class GridField {
public:
    GridField(const Grid& grid, double fill = 0.0);
    /// Throws std::invalid_argument on size mismatch or non-finite entries.
    GridField(const Grid& grid, std::vector<double> values);

    static GridField sample(const Grid& grid, const std::function<double(double, double)>& fn);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator()(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }
    double& operator()(int i, int j) noexcept { return values_[grid_.index(i, j)]; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }
    double& operator[](std::size_t k) noexcept { return values_[k]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    double min() const;
    double max() const;
    double sup_norm() const;
    /// Arithmetic mean with compensated summation.
    double mean() const;
    bool is_constant() const;
    bool all_finite() const;

    GridField& operator+=(const GridField& other);
    GridField& operator-=(const GridField& other);
    GridField& operator*=(double s);
    GridField& operator+=(double c);

    friend GridField operator+(GridField a, const GridField& b) { return a += b; }
    friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
    friend GridField operator*(GridField a, double s) { return a *= s; }
    friend GridField operator*(double s, GridField a) { return a *= s; }
    friend GridField operator+(GridField a, double c) { return a += c; }
    friend GridField operator-(GridField a) { return a *= -1.0; }

    /// Pointwise product.
    GridField times(const GridField& other) const;

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Sup-norm distance.
double sup_distance(const GridField& a, const GridField& b);
/// (1 - s) a + s b.
GridField lerp(const GridField& a, const GridField& b, double s);

/// A pair of grid fields read as a tangent vector field on the torus.
struct VectorField {
    GridField x;
    GridField y;
};

/// A grid function u with 1 + lap(u)/2 > 0 everywhere, with the density cached.
/// Only make_potential constructs one.
class Potential {
public:
    const GridField& field() const noexcept { return field_; }
    const GridField& ma_density() const noexcept { return density_; }
    const Grid& grid() const noexcept { return field_.grid(); }

private:
    Potential(GridField field, GridField density) : field_(std::move(field)), density_(std::move(density)) {}
    friend Potential make_potential(GridField f);

    GridField field_;
    GridField density_;
};

/// Values carried by weighted atoms: the discrete picture of (xi, mu_u).
class WeightedValues {
public:
    /// Throws std::invalid_argument on empty input, size mismatch,
    /// non-finite values or non-positive weights.
    WeightedValues(std::vector<double> values, std::vector<double> weights);

    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return values_.size(); }
    double total_mass() const noexcept { return total_mass_; }

private:
    std::vector<double> values_;
    std::vector<double> weights_;
    double total_mass_;
};

// Derivatives under the grid's scheme. Constant inputs give exact zeros.
GridField partial_x(const GridField& f);
GridField partial_y(const GridField& f);
VectorField gradient(const GridField& f);
/// Output has zero mean up to rounding.
GridField laplacian(const GridField& f);

/// Throws NotKahler if min(1 + lap(f)/2) <= 0.
Potential make_potential(GridField f);
/// Potential from a prescribed constant function.
Potential constant_potential(const Grid& grid, double c);

/// F(u) = 1/rho_u.
GridField f_density(const Potential& u);
/// (d_x xi, d_y xi) / rho_u.
VectorField metric_grad(const Potential& u, const GridField& xi);
/// grad xi . grad eta / rho_u.
GridField inner_product_du(const Potential& u, const GridField& xi, const GridField& eta);
/// (f_x g_y - f_y g_x) / rho_u.
GridField poisson_bracket(const Potential& u, const GridField& f, const GridField& g);
/// Quadrature sum f_ij rho_ij / N^2.
double integrate(const GridField& f, const Potential& u);

/// Cell masses rho_u / N^2 paired with the values of xi.
WeightedValues weighted_values(const Potential& u, const GridField& xi);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

/// Periodic bilinear interpolation at an arbitrary torus point.
double sample_bilinear(const GridField& f, double x, double y);

/// Trigonometric interpolant of a grid field (Nyquist modes dropped).
class TrigInterpolant {
public:
    explicit TrigInterpolant(const GridField& f);
    double operator()(double x, double y) const;

private:
    int n_;
    std::vector<double> re_;
    std::vector<double> im_;
};

/// Interpolation at a point consistent with the grid's scheme: trigonometric
/// for spectral grids, bilinear otherwise.
GridField interpolate_at(const GridField& f, std::span<const double> xs, std::span<const double> ys);

}  // namespace mal
