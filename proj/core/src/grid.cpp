#include "mal/grid.hpp"

#include "mal/error.hpp"
#include "spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mal {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// The FFTW planner is not thread safe; execution on fresh arrays is.
struct FftPlans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    FftPlans get(int n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        const std::size_t real_size = static_cast<std::size_t>(n) * n;
        const std::size_t complex_size = static_cast<std::size_t>(n) * (n / 2 + 1);
        double* in = fftw_alloc_real(real_size);
        fftw_complex* out = fftw_alloc_complex(complex_size);
        FftPlans p;
        p.forward = fftw_plan_dft_r2c_2d(n, n, in, out, FFTW_ESTIMATE);
        p.backward = fftw_plan_dft_c2r_2d(n, n, out, in, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
        plans_.emplace(n, p);
        return p;
    }

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [n, p] : plans_) {
            fftw_destroy_plan(p.forward);
            fftw_destroy_plan(p.backward);
        }
    }
    std::mutex mutex_;
    std::map<int, FftPlans> plans_;
};

struct FftwRealDeleter {
    void operator()(double* p) const { fftw_free(p); }
};
struct FftwComplexDeleter {
    void operator()(fftw_complex* p) const { fftw_free(p); }
};

int wavenumber(int index, int n) { return index <= n / 2 ? index : index - n; }

// Applies a multiplier m(kx, ky) in Fourier space. The multiplier receives
// signed wavenumbers and whether either index is a Nyquist index.
template <typename Multiplier>
GridField spectral_apply(const GridField& f, Multiplier&& multiplier) {
    const int n = f.grid().n();
    const std::size_t real_size = f.size();
    const int half = n / 2 + 1;
    const std::size_t complex_size = static_cast<std::size_t>(n) * half;
    FftPlans plans = PlanCache::instance().get(n);

    std::unique_ptr<double, FftwRealDeleter> in(fftw_alloc_real(real_size));
    std::unique_ptr<fftw_complex, FftwComplexDeleter> spec(fftw_alloc_complex(complex_size));
    std::copy(f.values().begin(), f.values().end(), in.get());
    fftw_execute_dft_r2c(plans.forward, in.get(), spec.get());

    for (int i = 0; i < n; ++i) {
        const int kx = wavenumber(i, n);
        for (int j = 0; j < half; ++j) {
            const int ky = j;
            const bool nyquist = (i == n / 2) || (j == n / 2);
            const std::complex<double> m = multiplier(kx, ky, nyquist);
            auto& c = spec.get()[static_cast<std::size_t>(i) * half + j];
            const std::complex<double> v = std::complex<double>(c[0], c[1]) * m;
            c[0] = v.real();
            c[1] = v.imag();
        }
    }
    fftw_execute_dft_c2r(plans.backward, spec.get(), in.get());
    std::vector<double> out(in.get(), in.get() + real_size);
    const double scale = 1.0 / static_cast<double>(real_size);
    for (auto& v : out) v *= scale;
    return GridField(f.grid(), std::move(out));
}

GridField fd_partial(const GridField& f, bool along_x) {
    const Grid& g = f.grid();
    const int n = g.n();
    const double inv = 0.5 * n;
    GridField out(g);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out(i, j) = along_x ? (f(i + 1, j) - f(i - 1, j)) * inv : (f(i, j + 1) - f(i, j - 1)) * inv;
        }
    }
    return out;
}

}  // namespace

namespace detail {

Spectrum forward_spectrum(const GridField& f) {
    const int n = f.grid().n();
    const std::size_t complex_size = static_cast<std::size_t>(n) * (n / 2 + 1);
    FftPlans plans = PlanCache::instance().get(n);
    std::unique_ptr<double, FftwRealDeleter> in(fftw_alloc_real(f.size()));
    std::unique_ptr<fftw_complex, FftwComplexDeleter> spec(fftw_alloc_complex(complex_size));
    std::copy(f.values().begin(), f.values().end(), in.get());
    fftw_execute_dft_r2c(plans.forward, in.get(), spec.get());
    Spectrum out(complex_size);
    for (std::size_t k = 0; k < complex_size; ++k) out[k] = {spec.get()[k][0], spec.get()[k][1]};
    return out;
}

GridField inverse_spectrum(const Grid& grid, const Spectrum& s) {
    const int n = grid.n();
    const std::size_t complex_size = static_cast<std::size_t>(n) * (n / 2 + 1);
    if (s.size() != complex_size) throw std::invalid_argument("spectrum size does not match the grid");
    FftPlans plans = PlanCache::instance().get(n);
    std::unique_ptr<double, FftwRealDeleter> out(fftw_alloc_real(grid.size()));
    std::unique_ptr<fftw_complex, FftwComplexDeleter> spec(fftw_alloc_complex(complex_size));
    for (std::size_t k = 0; k < complex_size; ++k) {
        spec.get()[k][0] = s[k].real();
        spec.get()[k][1] = s[k].imag();
    }
    fftw_execute_dft_c2r(plans.backward, spec.get(), out.get());
    const double scale = 1.0 / static_cast<double>(grid.size());
    std::vector<double> values(out.get(), out.get() + grid.size());
    for (auto& v : values) v *= scale;
    return GridField(grid, std::move(values));
}

int signed_wavenumber(int index, int n) { return wavenumber(index, n); }

}  // namespace detail

std::string_view to_string(DerivativeScheme scheme) {
    return scheme == DerivativeScheme::spectral ? "spectral" : "central-difference";
}

DerivativeScheme parse_scheme(std::string_view text) {
    if (text == "spectral") return DerivativeScheme::spectral;
    if (text == "central-difference" || text == "fd" || text == "central_difference") {
        return DerivativeScheme::central_difference;
    }
    throw std::invalid_argument("unknown derivative scheme '" + std::string(text) + "'");
}

Grid::Grid(int n_cells_per_side, DerivativeScheme scheme) : n_(n_cells_per_side), scheme_(scheme) {
    if (n_ < 4 || n_ % 2 != 0) {
        throw std::invalid_argument("grid size N must be even and >= 4, got " + std::to_string(n_));
    }
}

GridField::GridField(const Grid& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

GridField::GridField(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw std::invalid_argument("grid field size does not match grid");
    }
    if (!all_finite()) throw std::invalid_argument("grid field has non-finite values");
}

GridField GridField::sample(const Grid& grid, const std::function<double(double, double)>& fn) {
    GridField out(grid);
    for (int i = 0; i < grid.n(); ++i) {
        for (int j = 0; j < grid.n(); ++j) out(i, j) = fn(grid.coord(i), grid.coord(j));
    }
    if (!out.all_finite()) throw std::invalid_argument("sampled function is not finite");
    return out;
}

double GridField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double GridField::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double GridField::mean() const { return compensated_sum(values_) / static_cast<double>(values_.size()); }

bool GridField::is_constant() const {
    return std::all_of(values_.begin(), values_.end(), [&](double v) { return v == values_.front(); });
}

bool GridField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GridField& GridField::operator+=(const GridField& other) {
    if (other.grid_.n() != grid_.n()) throw std::invalid_argument("grid mismatch");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
    return *this;
}

GridField& GridField::operator-=(const GridField& other) {
    if (other.grid_.n() != grid_.n()) throw std::invalid_argument("grid mismatch");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
    return *this;
}

GridField& GridField::operator*=(double s) {
    for (auto& v : values_) v *= s;
    return *this;
}

GridField& GridField::operator+=(double c) {
    for (auto& v : values_) v += c;
    return *this;
}

GridField GridField::times(const GridField& other) const {
    GridField out(*this);
    for (std::size_t k = 0; k < values_.size(); ++k) out.values_[k] *= other.values_[k];
    return out;
}

double sup_distance(const GridField& a, const GridField& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

GridField lerp(const GridField& a, const GridField& b, double s) {
    GridField out(a.grid());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = (1.0 - s) * a[k] + s * b[k];
    return out;
}

WeightedValues::WeightedValues(std::vector<double> values, std::vector<double> weights)
    : values_(std::move(values)), weights_(std::move(weights)) {
    if (values_.empty()) throw std::invalid_argument("weighted values must be nonempty");
    if (values_.size() != weights_.size()) throw std::invalid_argument("values and weights differ in length");
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k])) throw std::invalid_argument("non-finite value");
        if (!(weights_[k] > 0.0) || !std::isfinite(weights_[k])) {
            throw std::invalid_argument("weights must be positive and finite");
        }
    }
    total_mass_ = compensated_sum(weights_);
}

GridField partial_x(const GridField& f) {
    if (f.is_constant()) return GridField(f.grid());
    if (f.grid().scheme() == DerivativeScheme::central_difference) return fd_partial(f, true);
    return spectral_apply(f, [](int kx, int, bool nyquist) {
        return nyquist ? std::complex<double>(0.0) : std::complex<double>(0.0, two_pi * kx);
    });
}

GridField partial_y(const GridField& f) {
    if (f.is_constant()) return GridField(f.grid());
    if (f.grid().scheme() == DerivativeScheme::central_difference) return fd_partial(f, false);
    return spectral_apply(f, [](int, int ky, bool nyquist) {
        return nyquist ? std::complex<double>(0.0) : std::complex<double>(0.0, two_pi * ky);
    });
}

VectorField gradient(const GridField& f) { return {partial_x(f), partial_y(f)}; }

GridField laplacian(const GridField& f) {
    const Grid& g = f.grid();
    if (f.is_constant()) return GridField(g);
    GridField out(g);
    if (g.scheme() == DerivativeScheme::central_difference) {
        const int n = g.n();
        const double inv_h2 = static_cast<double>(n) * n;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                out(i, j) = (f(i + 1, j) + f(i - 1, j) + f(i, j + 1) + f(i, j - 1) - 4.0 * f(i, j)) * inv_h2;
            }
        }
    } else {
        out = spectral_apply(f, [](int kx, int ky, bool) {
            return std::complex<double>(-two_pi * two_pi * (static_cast<double>(kx) * kx + static_cast<double>(ky) * ky));
        });
    }
    // Project out the rounding residue of the zero mode.
    const double m = out.mean();
    out += -m;
    return out;
}

Potential make_potential(GridField f) {
    if (!f.all_finite()) throw std::invalid_argument("potential has non-finite values");
    GridField density = laplacian(f);
    density *= 0.5;
    density += 1.0;
    const double lowest = density.min();
    if (!(lowest > 0.0)) throw NotKahler(lowest);
    return Potential(std::move(f), std::move(density));
}

Potential constant_potential(const Grid& grid, double c) { return make_potential(GridField(grid, c)); }

GridField f_density(const Potential& u) {
    GridField out(u.grid());
    const auto& rho = u.ma_density();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = 1.0 / rho[k];
    return out;
}

VectorField metric_grad(const Potential& u, const GridField& xi) {
    VectorField g = gradient(xi);
    const auto& rho = u.ma_density();
    for (std::size_t k = 0; k < rho.size(); ++k) {
        g.x[k] /= rho[k];
        g.y[k] /= rho[k];
    }
    return g;
}

GridField inner_product_du(const Potential& u, const GridField& xi, const GridField& eta) {
    const VectorField a = gradient(xi);
    const VectorField b = gradient(eta);
    const auto& rho = u.ma_density();
    GridField out(u.grid());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (a.x[k] * b.x[k] + a.y[k] * b.y[k]) / rho[k];
    return out;
}

GridField poisson_bracket(const Potential& u, const GridField& f, const GridField& g) {
    const VectorField a = gradient(f);
    const VectorField b = gradient(g);
    const auto& rho = u.ma_density();
    GridField out(u.grid());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (a.x[k] * b.y[k] - a.y[k] * b.x[k]) / rho[k];
    return out;
}

double integrate(const GridField& f, const Potential& u) {
    const auto& rho = u.ma_density();
    std::vector<double> terms(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) terms[k] = f[k] * rho[k];
    return compensated_sum(terms) / static_cast<double>(f.size());
}

WeightedValues weighted_values(const Potential& u, const GridField& xi) {
    const auto& rho = u.ma_density();
    const double cell = 1.0 / static_cast<double>(rho.size());
    std::vector<double> weights(rho.size());
    for (std::size_t k = 0; k < rho.size(); ++k) weights[k] = rho[k] * cell;
    return WeightedValues(std::vector<double>(xi.values().begin(), xi.values().end()), std::move(weights));
}

double compensated_sum(std::span<const double> values) {
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    return sum + carry;
}

double sample_bilinear(const GridField& f, double x, double y) {
    const int n = f.grid().n();
    const double fx = x * n;
    const double fy = y * n;
    const double ix = std::floor(fx);
    const double iy = std::floor(fy);
    const double tx = fx - ix;
    const double ty = fy - iy;
    const int i0 = static_cast<int>(ix);
    const int j0 = static_cast<int>(iy);
    return (1.0 - tx) * ((1.0 - ty) * f(i0, j0) + ty * f(i0, j0 + 1)) +
           tx * ((1.0 - ty) * f(i0 + 1, j0) + ty * f(i0 + 1, j0 + 1));
}

TrigInterpolant::TrigInterpolant(const GridField& f) : n_(f.grid().n()) {
    const int n = n_;
    const int half = n / 2 + 1;
    const std::size_t complex_size = static_cast<std::size_t>(n) * half;
    FftPlans plans = PlanCache::instance().get(n);
    std::unique_ptr<double, FftwRealDeleter> in(fftw_alloc_real(f.size()));
    std::unique_ptr<fftw_complex, FftwComplexDeleter> spec(fftw_alloc_complex(complex_size));
    std::copy(f.values().begin(), f.values().end(), in.get());
    fftw_execute_dft_r2c(plans.forward, in.get(), spec.get());
    re_.assign(complex_size, 0.0);
    im_.assign(complex_size, 0.0);
    const double scale = 1.0 / static_cast<double>(f.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < half; ++j) {
            if (i == n / 2 || j == n / 2) continue;
            const auto& c = spec.get()[static_cast<std::size_t>(i) * half + j];
            // Half-plane storage: columns j > 0 stand for themselves and their conjugates.
            const double mult = (j == 0) ? 1.0 : 2.0;
            re_[static_cast<std::size_t>(i) * half + j] = c[0] * scale * mult;
            im_[static_cast<std::size_t>(i) * half + j] = c[1] * scale * mult;
        }
    }
}

double TrigInterpolant::operator()(double x, double y) const {
    const int n = n_;
    const int half = n / 2 + 1;
    std::vector<std::complex<double>> ex(n);
    std::vector<std::complex<double>> ey(half);
    for (int i = 0; i < n; ++i) ex[i] = std::polar(1.0, two_pi * wavenumber(i, n) * x);
    for (int j = 0; j < half; ++j) ey[j] = std::polar(1.0, two_pi * j * y);
    // The j = 0 column must itself be Hermitian-summed over kx.
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < half; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * half + j;
            if (re_[k] == 0.0 && im_[k] == 0.0) continue;
            const std::complex<double> c(re_[k], im_[k]);
            total += (c * ex[i] * ey[j]).real();
        }
    }
    return total;
}

GridField interpolate_at(const GridField& f, std::span<const double> xs, std::span<const double> ys) {
    GridField out(f.grid());
    if (xs.size() != out.size() || ys.size() != out.size()) {
        throw std::invalid_argument("interpolation targets must have one point per cell");
    }
    if (f.is_constant()) return GridField(f.grid(), f[0]);
    if (f.grid().scheme() == DerivativeScheme::spectral) {
        const TrigInterpolant interp(f);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = interp(xs[k], ys[k]);
    } else {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = sample_bilinear(f, xs[k], ys[k]);
    }
    return out;
}

}  // namespace mal
