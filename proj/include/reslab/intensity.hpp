#pragma once

#include "reslab/grid.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace reslab {

struct ObjectStats {
    double mean = 0.0;
    double std = 0.0;  // population convention
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

ObjectStats object_stats(const Grid& grid, const BinaryMask& mask);

inline constexpr std::size_t kPlotHistogramBins = 100;
inline constexpr std::size_t kEqualizationBins = 256;

/// Uniform bins over [0,1]; values at exactly 1 fall in the last bin.
struct HistogramReport {
    std::vector<double> edges;  // bins + 1
    std::vector<std::size_t> counts;
    // Present when a split mask was given: masked pixels inside / outside it.
    std::optional<std::vector<std::size_t>> inside;
    std::optional<std::vector<std::size_t>> outside;

    std::size_t bins() const { return counts.size(); }
    std::size_t total() const;
};

/// Bin index for a value under the uniform [0,1] convention (clamped).
std::size_t histogram_bin(float value, std::size_t bins);

HistogramReport masked_histogram(const Grid& grid, const BinaryMask& mask, std::size_t bins,
                                 const BinaryMask* split = nullptr);

/// Accumulates `other` into `into`; both must have the same bin count.
void merge_histogram(HistogramReport& into, const HistogramReport& other);

/// Maps masked pixels through the CDF of their own `bins`-bin histogram
/// (inclusive of the pixel's bin, so the brightest level maps to 1).
/// Unmasked pixels are copied unchanged.
Grid equalize_masked(const Grid& grid, const BinaryMask& mask, std::size_t bins = kEqualizationBins);

}  // namespace reslab
