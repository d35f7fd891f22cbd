#include "reslab/blur.hpp"

#include "reslab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace reslab {

std::vector<double> gaussian_kernel(double sigma) {
    require(std::isfinite(sigma) && sigma >= 0.0, ErrorCode::kInvalidArgument,
            "gaussian blur: sigma must be finite and >= 0");
    if (sigma == 0.0) return {1.0};
    const auto radius = std::max<long long>(1, static_cast<long long>(std::ceil(4.0 * sigma)));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (long long d = -radius; d <= radius; ++d) {
        const double w = std::exp(-static_cast<double>(d * d) / (2.0 * sigma * sigma));
        taps[static_cast<std::size_t>(d + radius)] = w;
        sum += w;
    }
    for (double& w : taps) w /= sum;
    return taps;
}

std::size_t reflect_index(long long index, std::size_t n) {
    const auto period = static_cast<long long>(2 * n);
    long long m = index % period;
    if (m < 0) m += period;
    if (m >= static_cast<long long>(n)) m = period - 1 - m;
    return static_cast<std::size_t>(m);
}

Grid gaussian_blur(const Grid& grid, double sigma) {
    const std::vector<double> taps = gaussian_kernel(sigma);
    if (taps.size() == 1) return grid;
    const auto radius = static_cast<long long>(taps.size() / 2);
    const std::size_t H = grid.height(), W = grid.width();

    // Horizontal pass into a double buffer, then vertical pass.
    std::vector<double> tmp(H * W);
    std::vector<std::size_t> col_index(W + 2 * static_cast<std::size_t>(radius));
    for (long long c = -radius; c < static_cast<long long>(W) + radius; ++c) {
        col_index[static_cast<std::size_t>(c + radius)] = reflect_index(c, W);
    }
    for (std::size_t r = 0; r < H; ++r) {
        const float* row = grid.pixels().data() + r * W;
        for (std::size_t c = 0; c < W; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < taps.size(); ++t) acc += taps[t] * row[col_index[c + t]];
            tmp[r * W + c] = acc;
        }
    }

    std::vector<std::size_t> row_index(H + 2 * static_cast<std::size_t>(radius));
    for (long long r = -radius; r < static_cast<long long>(H) + radius; ++r) {
        row_index[static_cast<std::size_t>(r + radius)] = reflect_index(r, H);
    }
    Grid out(H, W);
    std::vector<double> acc(W);
    for (std::size_t r = 0; r < H; ++r) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t t = 0; t < taps.size(); ++t) {
            const double w = taps[t];
            const double* src = tmp.data() + row_index[r + t] * W;
            for (std::size_t c = 0; c < W; ++c) acc[c] += w * src[c];
        }
        for (std::size_t c = 0; c < W; ++c) out(r, c) = static_cast<float>(acc[c]);
    }
    return out;
}

}  // namespace reslab
