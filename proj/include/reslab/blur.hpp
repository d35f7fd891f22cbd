#pragma once

#include "reslab/grid.hpp"

#include <vector>

namespace reslab {

/// Normalized 1D Gaussian taps exp(-d^2 / 2 sigma^2) for |d| <= max(1, ceil(4 sigma)),
/// ordered from -radius to +radius. sigma == 0 yields the single tap {1}.
std::vector<double> gaussian_kernel(double sigma);

/// Half-sample symmetric reflection of an arbitrary index into [0, n).
std::size_t reflect_index(long long index, std::size_t n);

/// Separable Gaussian blur with reflect padding; sigma == 0 returns the input
/// unchanged. Throws kInvalidArgument for negative or non-finite sigma.
Grid gaussian_blur(const Grid& grid, double sigma);

}  // namespace reslab
