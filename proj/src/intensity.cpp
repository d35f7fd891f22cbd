#include "reslab/intensity.hpp"

#include "reslab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace reslab {

ObjectStats object_stats(const Grid& grid, const BinaryMask& mask) {
    require_same_shape(grid.shape(), mask.shape(), "object_stats");
    ObjectStats st;
    double sum = 0.0;
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!mask[i]) continue;
        const double v = grid[i];
        if (st.count == 0) lo = hi = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
        ++st.count;
    }
    require(st.count > 0, ErrorCode::kEmptyMask, "object_stats: mask is empty");
    st.mean = sum / static_cast<double>(st.count);
    double ss = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!mask[i]) continue;
        const double d = grid[i] - st.mean;
        ss += d * d;
    }
    st.std = std::sqrt(ss / static_cast<double>(st.count));
    st.min = lo;
    st.max = hi;
    return st;
}

std::size_t HistogramReport::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::size_t histogram_bin(float value, std::size_t bins) {
    const double scaled = std::floor(static_cast<double>(value) * static_cast<double>(bins));
    if (scaled <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(scaled), bins - 1);
}

HistogramReport masked_histogram(const Grid& grid, const BinaryMask& mask, std::size_t bins,
                                 const BinaryMask* split) {
    require(bins >= 2, ErrorCode::kInvalidArgument, "masked_histogram: need at least 2 bins");
    require_same_shape(grid.shape(), mask.shape(), "masked_histogram");
    if (split) require_same_shape(grid.shape(), split->shape(), "masked_histogram split");

    HistogramReport h;
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = static_cast<double>(b) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    if (split) {
        h.inside.emplace(bins, 0);
        h.outside.emplace(bins, 0);
    }
    std::size_t masked = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!mask[i]) continue;
        const std::size_t b = histogram_bin(grid[i], bins);
        ++h.counts[b];
        ++masked;
        if (split) ++((*split)[i] ? *h.inside : *h.outside)[b];
    }
    require(masked > 0, ErrorCode::kEmptyMask, "masked_histogram: mask is empty");
    return h;
}

void merge_histogram(HistogramReport& into, const HistogramReport& other) {
    require(into.bins() == other.bins(), ErrorCode::kGridMismatch, "merge_histogram: bin counts differ");
    for (std::size_t b = 0; b < into.bins(); ++b) into.counts[b] += other.counts[b];
    if (into.inside && other.inside) {
        for (std::size_t b = 0; b < into.bins(); ++b) {
            (*into.inside)[b] += (*other.inside)[b];
            (*into.outside)[b] += (*other.outside)[b];
        }
    }
}

Grid equalize_masked(const Grid& grid, const BinaryMask& mask, std::size_t bins) {
    const HistogramReport h = masked_histogram(grid, mask, bins);
    const double total = static_cast<double>(h.total());
    std::vector<float> cdf(bins);
    std::size_t running = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        running += h.counts[b];
        cdf[b] = static_cast<float>(static_cast<double>(running) / total);
    }
    Grid out = grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (mask[i]) out[i] = cdf[histogram_bin(grid[i], bins)];
    }
    return out;
}

}  // namespace reslab
