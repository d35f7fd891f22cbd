#include "reslab/intensity.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace reslab {
namespace {

TEST(ObjectStatsTest, MatchesDirectComputation) {
    const Grid g = testing::random_grid(9, 11, 3);
    BinaryMask m(9, 11);
    for (std::size_t i = 0; i < g.size(); i += 3) m.set(i, true);

    double sum = 0.0, lo = 1e9, hi = -1e9;
    std::size_t n = 0;
    for (std::size_t i = 0; i < g.size(); i += 3) {
        sum += g[i];
        lo = std::min(lo, double(g[i]));
        hi = std::max(hi, double(g[i]));
        ++n;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < g.size(); i += 3) ss += (g[i] - mean) * (g[i] - mean);

    const ObjectStats s = object_stats(g, m);
    EXPECT_EQ(s.count, n);
    EXPECT_NEAR(s.mean, mean, 1e-12);
    EXPECT_NEAR(s.std, std::sqrt(ss / n), 1e-12);
    EXPECT_EQ(s.min, lo);
    EXPECT_EQ(s.max, hi);
}

TEST(HistogramTest, BinConventionAndTotals) {
    EXPECT_EQ(histogram_bin(0.0f, 100), 0u);
    EXPECT_EQ(histogram_bin(1.0f, 100), 99u);
    EXPECT_EQ(histogram_bin(0.505f, 100), 50u);
    EXPECT_EQ(histogram_bin(-0.5f, 10), 0u);
    EXPECT_EQ(histogram_bin(2.0f, 10), 9u);

    const Grid g = testing::random_grid(16, 16, 5);
    BinaryMask mask(16, 16);
    BinaryMask split(16, 16);
    for (std::size_t i = 0; i < g.size(); ++i) {
        mask.set(i, i % 2 == 0);
        split.set(i, i % 3 == 0);
    }
    const HistogramReport r = masked_histogram(g, mask, kPlotHistogramBins, &split);
    EXPECT_EQ(r.bins(), 100u);
    EXPECT_EQ(r.edges.size(), 101u);
    EXPECT_EQ(r.edges.front(), 0.0);
    EXPECT_EQ(r.edges.back(), 1.0);
    EXPECT_EQ(r.total(), mask.count());
    ASSERT_TRUE(r.inside && r.outside);
    std::size_t in = 0, out = 0;
    for (std::size_t b = 0; b < r.bins(); ++b) {
        EXPECT_EQ((*r.inside)[b] + (*r.outside)[b], r.counts[b]);
        in += (*r.inside)[b];
        out += (*r.outside)[b];
    }
    std::size_t expect_in = 0;
    for (std::size_t i = 0; i < g.size(); ++i) expect_in += (i % 2 == 0 && i % 3 == 0);
    EXPECT_EQ(in, expect_in);
    EXPECT_EQ(out, mask.count() - expect_in);

    HistogramReport merged = r;
    merge_histogram(merged, r);
    EXPECT_EQ(merged.total(), 2 * r.total());
    EXPECT_ANY_THROW(merge_histogram(merged, masked_histogram(g, mask, 10)));
}

TEST(EqualizeTest, TwoLevelObjectMapsToHalfAndOne) {
    const Grid g(1, 5, std::vector<float>{0.0f, 0.3f, 0.3f, 0.7f, 0.7f});
    const BinaryMask m(1, 5, std::vector<std::uint8_t>{0, 1, 1, 1, 1});
    const Grid e = equalize_masked(g, m);
    EXPECT_EQ(e[0], 0.0f);
    EXPECT_FLOAT_EQ(e[1], 0.5f);
    EXPECT_FLOAT_EQ(e[2], 0.5f);
    EXPECT_FLOAT_EQ(e[3], 1.0f);
    EXPECT_FLOAT_EQ(e[4], 1.0f);
}

TEST(EqualizeTest, MonotoneInsideAndUntouchedOutside) {
    const Grid g = testing::random_grid(20, 20, 9);
    BinaryMask m(20, 20);
    for (std::size_t r = 3; r < 17; ++r)
        for (std::size_t c = 3; c < 17; ++c) m.set(r, c, true);
    const Grid e = equalize_masked(g, m);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!m[i]) {
            EXPECT_EQ(e[i], g[i]);
            continue;
        }
        EXPECT_GT(e[i], 0.0f);
        EXPECT_LE(e[i], 1.0f);
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (m[j] && g[j] < g[i]) ASSERT_LE(e[j], e[i]);
        }
    }
}

}  // namespace
}  // namespace reslab
