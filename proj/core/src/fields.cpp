#include "mal/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mal {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double trig_mode(std::size_t k, double x, double y) {
    switch (k) {
        case 0: return std::cos(two_pi * x);
        case 1: return std::cos(two_pi * y);
        case 2: return std::sin(two_pi * (x + y));
        case 3: return std::cos(two_pi * (x - y));
        case 4: return std::sin(2.0 * two_pi * x);
        case 5: return std::cos(two_pi * (2.0 * x + y));
        case 6: return std::sin(two_pi * (x - 2.0 * y));
        case 7: return std::cos(2.0 * two_pi * y);
        default: return 0.0;
    }
}

}  // namespace

GridField trig_field(const Grid& grid, double constant, std::span<const double> amplitudes) {
    if (amplitudes.size() > trig_mode_count) {
        throw std::invalid_argument("at most 8 trigonometric amplitudes are supported");
    }
    return GridField::sample(grid, [&](double x, double y) {
        double v = constant;
        for (std::size_t k = 0; k < amplitudes.size(); ++k) v += amplitudes[k] * trig_mode(k, x, y);
        return v;
    });
}

GridField random_band_limited(const Grid& grid, int max_mode, std::mt19937_64& rng) {
    if (max_mode < 1 || 2 * max_mode >= grid.n()) {
        throw std::invalid_argument("max_mode must be in [1, N/2)");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    struct Mode {
        int kx, ky;
        double a, b;
    };
    std::vector<Mode> modes;
    for (int kx = -max_mode; kx <= max_mode; ++kx) {
        for (int ky = 0; ky <= max_mode; ++ky) {
            if (ky == 0 && kx <= 0) continue;
            const double decay = 1.0 / (1.0 + kx * kx + ky * ky);
            modes.push_back({kx, ky, normal(rng) * decay, normal(rng) * decay});
        }
    }
    GridField f = GridField::sample(grid, [&](double x, double y) {
        double v = 0.0;
        for (const auto& m : modes) {
            const double phase = two_pi * (m.kx * x + m.ky * y);
            v += m.a * std::cos(phase) + m.b * std::sin(phase);
        }
        return v;
    });
    const double s = f.sup_norm();
    if (s > 0.0) f *= 1.0 / s;
    return f;
}

double admissible_scale(const Potential& base, const GridField& direction, double margin, double cap) {
    const GridField lap = laplacian(direction);
    const auto& rho = base.ma_density();
    double best = cap;
    for (std::size_t k = 0; k < rho.size(); ++k) {
        const double slope = 0.5 * lap[k];
        if (slope < 0.0) best = std::min(best, (rho[k] - margin) / -slope);
    }
    return std::max(best, 0.0);
}

}  // namespace mal
