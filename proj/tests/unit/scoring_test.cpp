#include "../common/ap_oracle.hpp"
#include "reslab/errors.hpp"
#include "reslab/scoring.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace reslab {
namespace {

TEST(AveragePrecisionTest, HandWorkedExample) {
    // labels [1,0,1,0], scores [0.9,0.8,0.7,0.1]
    const std::vector<float> pos{0.9f, 0.7f}, neg{0.8f, 0.1f};
    EXPECT_NEAR(average_precision(pos, neg), 1.0 * 0.5 + (2.0 / 3.0) * 0.5, 1e-12);
}

TEST(AveragePrecisionTest, PerfectSeparationIsExactlyOne) {
    const std::vector<float> pos{0.5f, 0.6f, 0.7f}, neg{0.1f, 0.2f, 0.49f};
    EXPECT_EQ(average_precision(pos, neg), 1.0);
}

TEST(AveragePrecisionTest, AllScoresEqualGivePrevalence) {
    const std::vector<float> pos(3, 0.0f), neg(9, 0.0f);
    EXPECT_DOUBLE_EQ(average_precision(pos, neg), 0.25);
    EXPECT_EQ(average_precision(pos, {}), 1.0);
}

TEST(AveragePrecisionTest, NoPositivesIsAnError) {
    try {
        average_precision(std::vector<float>{}, std::vector<float>{0.1f});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kNoPositives);
    }
}

TEST(AveragePrecisionTest, MatchesOracleOnRandomAndTiedScores) {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.below(400);
        const int levels = trial % 3 == 0 ? 3 : (trial % 3 == 1 ? 20 : 0);
        std::vector<float> pos, neg;
        for (std::size_t i = 0; i < n; ++i) {
            const float s = levels ? static_cast<float>(rng.below(levels)) / levels : static_cast<float>(rng.uniform01());
            (rng.uniform01() < 0.2 ? pos : neg).push_back(s);
        }
        if (pos.empty()) pos.push_back(0.5f);
        const double expect = testing::brute_force_ap(pos, neg);
        ASSERT_NEAR(average_precision(pos, neg), expect, 1e-9) << trial;
        ASSERT_NEAR(NegativeRanking(neg).average_precision(pos), expect, 1e-9) << trial;
    }
}

TEST(AveragePrecisionTest, MapVersionRespectsEvalMask) {
    const Grid scores(1, 5, std::vector<float>{0.9f, 0.8f, 0.7f, 0.1f, 0.95f});
    const BinaryMask truth(1, 5, std::vector<std::uint8_t>{1, 0, 1, 0, 0});
    const BinaryMask eval(1, 5, std::vector<std::uint8_t>{1, 1, 1, 1, 0});
    EXPECT_NEAR(average_precision(AnomalyMap{scores}, truth, &eval), 0.5 + (2.0 / 3.0) * 0.5, 1e-12);
    EXPECT_LT(average_precision(AnomalyMap{scores}, truth), 0.8);
    EXPECT_THROW(average_precision(AnomalyMap{scores}, BinaryMask(1, 4)), Error);
}

TEST(ResidualTest, AbsoluteDifference) {
    const Grid x(1, 3, std::vector<float>{0.2f, 0.5f, 1.0f});
    const Grid y(1, 3, std::vector<float>{0.5f, 0.5f, 0.0f});
    const AnomalyMap m = residual_map(x, y);
    EXPECT_FLOAT_EQ(m.scores[0], 0.3f);
    EXPECT_EQ(m.scores[1], 0.0f);
    EXPECT_EQ(m.scores[2], 1.0f);
    EXPECT_THROW(residual_map(x, Grid(3, 1)), Error);
}

ScoredImage scored(const std::string& id, std::vector<float> s, std::vector<std::uint8_t> t) {
    const std::size_t n = s.size();
    return {id, AnomalyMap{Grid(1, n, std::move(s))}, BinaryMask(1, n, std::move(t)), std::nullopt};
}

TEST(DatasetApTest, MacroMeanAndPopulationStd) {
    std::vector<ScoredImage> imgs;
    imgs.push_back(scored("a", {0.9f, 0.1f}, {1, 0}));
    imgs.push_back(scored("b", {0.0f, 0.0f}, {1, 0}));
    const ApResult r = dataset_ap(imgs);
    EXPECT_EQ(r.per_image, (std::vector<double>{1.0, 0.5}));
    EXPECT_DOUBLE_EQ(r.mean, 0.75);
    EXPECT_DOUBLE_EQ(r.std_dev(), 0.25);

    std::swap(imgs[0], imgs[1]);
    EXPECT_DOUBLE_EQ(dataset_ap(imgs).mean, 0.75);

    imgs.push_back(scored("empty", {0.3f}, {0}));
    try {
        dataset_ap(imgs);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("empty"), std::string::npos);
    }
}

TEST(DatasetApTest, CsvLayout) {
    const ApResult r = summarize_ap({"x", "y"}, {1.0, 0.5});
    std::ostringstream out;
    write_ap_csv(r, out);
    EXPECT_EQ(out.str(), "image_id,ap\nx,1.0000000000\ny,0.5000000000\n__mean__,0.7500000000\n");
}

std::vector<SigmaCurve> blur_family(const std::vector<double>& intensities) {
    std::vector<SigmaCurve> curves;
    for (double sigma : {0.0, 0.25, 0.61, 1.0, 2.0, 5.0}) {
        ApCurve c{intensities, {}};
        for (double i : intensities) c.ap.push_back(1.0 / (1.0 + sigma * (1.0 - i)));
        curves.push_back({sigma, c});
    }
    return curves;
}

TEST(BestSigmaTest, CopiedCurveFindsItsSigma) {
    const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto curves = blur_family(grid);
    const CurveMatch m = best_matching_sigma(curves[2].curve, curves);
    EXPECT_EQ(m.best_sigma, 0.61);
    EXPECT_EQ(m.best_distance, 0.0);
    ASSERT_EQ(m.distances.size(), curves.size());
    EXPECT_EQ(m.sigmas.front(), 0.0);
}

TEST(BestSigmaTest, MatchesDirectL1SearchAndPrefersSmallerSigmaOnTies) {
    const std::vector<double> grid{0.0, 0.5, 1.0};
    const auto curves = blur_family(grid);
    const ApCurve model{grid, {0.7, 0.8, 1.0}};
    // Reference: scan from the largest sigma down, keep <= so ties land on the smaller sigma.
    double best = 0, best_d = 1e9;
    for (auto it = curves.rbegin(); it != curves.rend(); ++it) {
        double d = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) d += std::abs(model.ap[i] - it->curve.ap[i]);
        if (d <= best_d) {
            best_d = d;
            best = it->sigma;
        }
    }
    const CurveMatch m = best_matching_sigma(model, curves);
    EXPECT_EQ(m.best_sigma, best);
    EXPECT_NEAR(m.best_distance, best_d, 1e-12);

    std::vector<SigmaCurve> twins{{2.0, {grid, {0.5, 0.5, 0.5}}}, {1.0, {grid, {0.5, 0.5, 0.5}}}};
    EXPECT_EQ(best_matching_sigma({grid, {0.4, 0.5, 0.6}}, twins).best_sigma, 1.0);
}

TEST(BestSigmaTest, MismatchedGridsAreRejected) {
    const auto curves = blur_family({0.0, 0.5, 1.0});
    try {
        best_matching_sigma({{0.0, 0.4, 1.0}, {1, 1, 1}}, curves);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kGridMismatch);
    }
}

}  // namespace
}  // namespace reslab
