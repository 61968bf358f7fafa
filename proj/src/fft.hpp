#pragma once

#include "maglab/grid.hpp"

#include <span>
#include <vector>

namespace maglab::detail {

/// Unnormalized in-place DFT along one axis. sign = -1 forward, +1 backward.
void fft_axis(std::span<cplx> data, const GridSpec& spec, int axis, int sign);

/// Unnormalized in-place d-dimensional DFT.
void fft_all(std::span<cplx> data, const GridSpec& spec, int sign);

/// Angular wavenumbers pi*m/L indexed like FFT output, m in [-N/2, N/2).
std::vector<double> wavenumbers(const GridSpec& spec);

/// Applies psi -> IFFT_axis( mult(k) * FFT_axis(psi) ) in place, where the
/// multiplier is indexed by the position along `axis`.
void fourier_multiply_axis(std::span<cplx> data, const GridSpec& spec, int axis,
                           std::span<const cplx> multiplier);

} // namespace maglab::detail
