#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace reslab::testing {

// Threshold enumeration: for every distinct score t (descending), classify
// score >= t as positive and add (recall step) * precision. Counts come from
// binary search over sorted copies; no running sums are shared with the
// library's sweep.
inline double brute_force_ap(std::vector<float> pos, std::vector<float> neg) {
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    auto count_ge = [](const std::vector<float>& v, float t) {
        return static_cast<std::size_t>(v.end() - std::lower_bound(v.begin(), v.end(), t));
    };
    std::vector<float> thresholds = pos;
    thresholds.insert(thresholds.end(), neg.begin(), neg.end());
    std::sort(thresholds.begin(), thresholds.end(), [](float a, float b) { return a > b; });
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    double ap = 0.0;
    double prev_recall = 0.0;
    for (float t : thresholds) {
        const std::size_t tp = count_ge(pos, t);
        const std::size_t fp = count_ge(neg, t);
        const double recall = static_cast<double>(tp) / static_cast<double>(pos.size());
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

}  // namespace reslab::testing
