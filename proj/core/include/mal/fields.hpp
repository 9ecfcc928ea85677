#pragma once

// Smooth test fields: the fixed trigonometric mode table used by named
// fixtures, and seeded random band-limited fields.

#include "mal/grid.hpp"

#include <cstdint>
#include <random>
#include <span>

namespace mal {

/// Number of entries in the fixed mode table used by trig_field.
inline constexpr std::size_t trig_mode_count = 8;

/// constant + sum_k amplitudes[k] * mode_k(x, y), where mode_k runs through
/// cos 2pi x, cos 2pi y, sin 2pi(x+y), cos 2pi(x-y), sin 4pi x, cos 2pi(2x+y),
/// sin 2pi(x-2y), cos 4pi y. Throws std::invalid_argument for more than
/// trig_mode_count amplitudes.
GridField trig_field(const Grid& grid, double constant, std::span<const double> amplitudes);

/// Random combination of Fourier modes with |k|_inf <= max_mode, rescaled to
/// sup norm 1 (zero-mean). Deterministic for a given engine state.
GridField random_band_limited(const Grid& grid, int max_mode, std::mt19937_64& rng);

/// Largest c such that base + c * direction stays a potential, capped at cap.
/// Uses the density bound 1 + lap(base)/2 + c lap(direction)/2 > margin.
double admissible_scale(const Potential& base, const GridField& direction, double margin, double cap);

}  // namespace mal
