#include "reslab/errors.hpp"
#include "reslab/plot.hpp"

#include <gtest/gtest.h>

namespace reslab {
namespace {

ScoreRow row(double i, double sigma, double ap) {
    ScoreRow r;
    r.experiment = ExperimentId::kExp1;
    r.kind = "intensity";
    r.intensity = i;
    r.sigma = sigma;
    r.model = "blur";
    r.mode = "healthy";
    r.mean_ap = ap;
    r.mean_recon_err = sigma / 10;
    r.n_images = 1;
    return r;
}

TEST(PlotTest, SingleRowRendersEveryKind) {
    const std::vector<ScoreRow> rows{row(0.5, 1, 0.7)};
    for (PlotKind k : {PlotKind::kLine, PlotKind::kHeatmap, PlotKind::kScatter}) {
        const std::string svg = render_plot(rows, k);
        EXPECT_NE(svg.find("<svg"), std::string::npos) << to_string(k);
        EXPECT_NE(svg.find("</svg>"), std::string::npos);
    }
}

TEST(PlotTest, DeterministicAndSeriesLabelled) {
    std::vector<ScoreRow> rows;
    for (double s : {0.0, 2.0})
        for (double i : {0.0, 0.5, 1.0}) rows.push_back(row(i, s, 1 - i * s / 4));
    const std::string a = render_plot(rows, PlotKind::kLine);
    EXPECT_EQ(a, render_plot(rows, PlotKind::kLine));
    EXPECT_NE(a.find("blur:2"), std::string::npos);
    EXPECT_NE(a.find("blur:0"), std::string::npos);
}

TEST(PlotTest, RejectsEmptyMixedAndIncompleteTables) {
    try {
        render_plot({}, PlotKind::kLine);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
    }
    std::vector<ScoreRow> mixed{row(0.5, 1, 0.7), row(0.5, 1, 0.7)};
    mixed[1].experiment = ExperimentId::kExp2;
    EXPECT_THROW(render_plot(mixed, PlotKind::kLine), Error);
    std::vector<ScoreRow> no_err{row(0.5, 1, 0.7)};
    no_err[0].mean_recon_err.reset();
    EXPECT_THROW(render_plot(no_err, PlotKind::kScatter), Error);
    EXPECT_EQ(parse_plot_kind("heatmap"), PlotKind::kHeatmap);
    EXPECT_THROW(parse_plot_kind("pie"), Error);
}

}  // namespace
}  // namespace reslab
