#pragma once

#include "mazya/types.hpp"

#include <complex>
#include <vector>

namespace mazya::detail {

/// In-place separable FFT of a row-major L^d array (last axis fastest).
/// The inverse transform includes the 1/L^d normalization.
void fft_nd(std::vector<std::complex<double>>& data, int d, Index length, bool inverse);

Index next_power_of_two(Index n);

}  // namespace mazya::detail
