#pragma once

// Shared endpoint fixtures for unit and acceptance tests.

#include "mal/fields.hpp"
#include "mal/grid.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace mal::testing {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// The standard pair: small trigonometric endpoints a constant 1/2 apart.
inline Potential standard_a(const Grid& g) { return make_potential(trig_field(g, 0.0, std::vector<double>{0.01, 0.005, 0.0025})); }
inline Potential standard_b(const Grid& g) {
    return make_potential(trig_field(g, 0.5, std::vector<double>{-0.005, 0.01, 0.0, 0.005}));
}

/// Endpoint with seeded band-limited content: c + amp * h, amp scaled so that
/// the density stays above 1/2.
inline Potential random_endpoint(const Grid& g, double c, double amp, std::mt19937_64& rng) {
    const GridField h = random_band_limited(g, 2, rng);
    const Potential base = make_potential(GridField(g, c));
    return make_potential(GridField(g, c) + h * admissible_scale(base, h, 0.5, amp));
}

inline double max_abs_diff(const GridField& a, const GridField& b) { return sup_distance(a, b); }

}  // namespace mal::testing
