#pragma once

// Raw access to the real-to-complex transform of a grid field, for solvers
// that act mode by mode across several fields.

#include "mal/grid.hpp"

#include <complex>
#include <vector>

namespace mal::detail {

/// Row-major n x (n/2 + 1) half-plane coefficients, unnormalized.
using Spectrum = std::vector<std::complex<double>>;

Spectrum forward_spectrum(const GridField& f);
/// Inverse of forward_spectrum, including the 1/N^2 normalization.
GridField inverse_spectrum(const Grid& grid, const Spectrum& s);
/// Signed wavenumber of an FFT index.
int signed_wavenumber(int index, int n);

}  // namespace mal::detail
