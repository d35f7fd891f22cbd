#include "reslab/blur.hpp"
#include "reslab/errors.hpp"
#include "reslab/harness.hpp"
#include "reslab/phantom.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

namespace reslab {
namespace {

SweepConfig small(ExperimentId id) {
    SweepConfig c = default_config(id);
    c.test.phantom_count = 4;
    c.train.phantom_count = 12;
    c.phantom_size = 64;
    c.radius = 6;
    c.intensities = {0.2, 0.5, 1.0};
    c.sigmas = {0, 1, 2};
    c.models = {parse_model_spec("subspace:0"), parse_model_spec("subspace:4")};
    c.threads = 1;
    return c;
}

TEST(HarnessTest, Exp1RowsAreSigmaMajorAndExactAtZeroBlur) {
    const SweepConfig c = small(ExperimentId::kExp1);
    const auto result = run_exp1(c);
    ASSERT_EQ(result.rows.size(), 9u);
    EXPECT_EQ(result.rows[0].sigma, 0.0);
    EXPECT_EQ(result.rows[1].intensity, 0.5);
    EXPECT_EQ(result.rows[3].sigma, 1.0);
    for (const auto& r : result.rows) {
        EXPECT_EQ(r.n_images, 4u);
        EXPECT_EQ(r.model, "blur");
        EXPECT_EQ(r.mode, "healthy");
        EXPECT_EQ(r.kind, "intensity");
        ASSERT_TRUE(r.mean_recon_err);
    }
    EXPECT_EQ(result.rows[2].mean_ap, 1.0);
    EXPECT_EQ(*result.rows[0].mean_recon_err, 0.0);
    EXPECT_GT(*result.rows[8].mean_recon_err, *result.rows[5].mean_recon_err);
}

// Independent recomputation of one exp1 cell from the public building blocks.
TEST(HarnessTest, Exp1CellMatchesDirectComputation) {
    const SweepConfig c = small(ExperimentId::kExp1);
    const Dataset test = load_test_data(c);
    const auto prepared = prepare_images(test, c.radius, c.seed);
    std::vector<ScoredImage> scored;
    for (const auto& img : prepared) {
        const InjectionRecord inj = inject_intensity(img.image, img.region, 0.5);
        const Grid recon = gaussian_blur(img.image, 2.0);
        scored.push_back({img.stem, residual_map(inj.image, recon), inj.truth, std::nullopt});
    }
    const ApResult direct = dataset_ap(scored);
    const auto rows = run_exp1(c, test).rows;
    EXPECT_NEAR(rows[7].mean_ap, direct.mean, 1e-12);
    EXPECT_NEAR(rows[7].ap_std, direct.std_dev(), 1e-12);
}

TEST(HarnessTest, RegionsAreInsideObjectsAndReproducible) {
    const Dataset test = make_phantom_set(0, DatasetRole::kTest, 3, 64);
    const auto a = prepare_images(test, 6, 1);
    const auto b = prepare_images(test, 6, 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].region, b[i].region);
        for (std::size_t p = 0; p < a[i].truth.size(); ++p) {
            if (a[i].truth[p]) ASSERT_TRUE(a[i].object[p]);
        }
    }
    try {
        prepare_images(test, 40, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kNoAdmissibleCenter);
        EXPECT_NE(std::string(e.what()).find(test[0].stem), std::string::npos);
    }
}

TEST(HarnessTest, Exp2RowsPerKindAndSigma) {
    SweepConfig c = small(ExperimentId::kExp2);
    const auto result = run_exp2(c);
    ASSERT_EQ(result.rows.size(), 4u * 3u);
    EXPECT_EQ(result.rows[0].kind, "sink");
    EXPECT_EQ(result.rows[3].kind, "source");
    EXPECT_FALSE(result.rows[0].intensity);
    ASSERT_TRUE(result.rows[9].intensity);
    const double auto_ref = mean_object_intensity(load_test_data(c));
    EXPECT_NEAR(*result.rows[9].intensity, auto_ref, 1e-12);

    c.reference_intensity = 0.3;
    EXPECT_EQ(*run_exp2(c).rows[9].intensity, 0.3);
}

TEST(HarnessTest, ThreadCountDoesNotChangeResults) {
    for (ExperimentId id : {ExperimentId::kExp1, ExperimentId::kExp2, ExperimentId::kExp3Healthy}) {
        SweepConfig c = small(id);
        c.modes = {ReconMode::kHealthy, ReconMode::kAnomalous};
        auto run = [&](unsigned threads) {
            c.threads = threads;
            const auto rows = id == ExperimentId::kExp1   ? run_exp1(c).rows
                              : id == ExperimentId::kExp2 ? run_exp2(c).rows
                                                          : run_exp3(c).rows;
            std::ostringstream out;
            write_score_csv(rows, out);
            return out.str();
        };
        EXPECT_EQ(run(1), run(5)) << to_string(id);
    }
}

TEST(HarnessTest, Exp3IdentityAnomalousScoresPrevalence) {
    SweepConfig c = small(ExperimentId::kExp3Anomalous);
    c.models = {parse_model_spec("identity")};
    c.match_sigma = false;
    const Dataset test = load_test_data(c);
    const auto result = run_exp3(c, test, {});
    const auto prepared = prepare_images(test, c.radius, c.seed);
    double prevalence = 0;
    for (const auto& img : prepared) prevalence += double(img.truth.count()) / double(img.truth.size());
    prevalence /= double(prepared.size());
    ASSERT_EQ(result.rows.size(), 3u);
    for (const auto& r : result.rows) {
        EXPECT_EQ(r.experiment, ExperimentId::kExp3Anomalous);
        EXPECT_NEAR(r.mean_ap, prevalence, 1e-12);
        EXPECT_EQ(*r.mean_recon_err, 0.0);
    }
}

TEST(HarnessTest, Exp3MeanOnlyModelIsModeIndependent) {
    SweepConfig c = small(ExperimentId::kExp3Healthy);
    c.models = {parse_model_spec("subspace:0")};
    c.modes = {ReconMode::kHealthy, ReconMode::kAnomalous};
    c.match_sigma = true;
    const auto result = run_exp3(c);
    ASSERT_EQ(result.rows.size(), 6u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(result.rows[i].mode, "healthy");
        EXPECT_EQ(result.rows[i + 3].mode, "anomalous");
        EXPECT_EQ(result.rows[i].k, 0u);
        EXPECT_NEAR(result.rows[i].mean_ap, result.rows[i + 3].mean_ap, 1e-12);
    }
    ASSERT_EQ(result.summaries.size(), 2u);
    ASSERT_EQ(result.best_sigma.size(), 2u);
    EXPECT_EQ(result.best_sigma[0].match.sigmas, c.sigmas);
}

TEST(HarnessTest, MissingExternalReconstructionsAreAllListed) {
    testing::TempDir dir;
    SweepConfig c = small(ExperimentId::kExp3Healthy);
    c.models = {parse_model_spec("external:" + dir.path().string() + ":ae")};
    c.modes = {ReconMode::kHealthy};
    c.match_sigma = false;
    const Dataset test = load_test_data(c);
    write_grid(test[1].image, dir / (test[1].stem + ".healthy.f32g"));
    try {
        run_exp3(c, test, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kMissingReconstruction);
        const std::string msg = e.what();
        EXPECT_NE(msg.find("3 external"), std::string::npos) << msg;
        EXPECT_NE(msg.find(test[0].stem + ".healthy.f32g"), std::string::npos);
        EXPECT_EQ(msg.find(test[1].stem + ".healthy.f32g"), std::string::npos);
    }
    for (const auto& s : test) write_grid(s.image, dir / (s.stem + ".healthy.f32g"));
    const auto rows = run_exp3(c, test, {}).rows;
    EXPECT_EQ(rows[0].model, "ae");
    EXPECT_EQ(*rows[0].mean_recon_err, 0.0);
}

// Files-only round trip with an external reconstructor: export the anomalous
// inputs, "reconstruct" them elsewhere (here: copy them), then score.
TEST(HarnessTest, ExportedInjectionsFeedExternalReconstructions) {
    testing::TempDir dir;
    SweepConfig c = small(ExperimentId::kExp3Anomalous);
    c.models = {parse_model_spec("identity")};
    c.match_sigma = false;
    c.export_injections = true;
    c.out = dir / "first";
    const auto identity_rows = run_experiment(c).rows;

    const DatasetManifest exported = read_manifest(c.out / "injections/manifest.txt");
    ASSERT_EQ(exported.entries.size(), 4u * 3u);
    const auto recon_dir = dir / "recon";
    std::filesystem::create_directories(recon_dir);
    for (const auto& s : load_dataset(exported)) {
        EXPECT_TRUE(std::filesystem::exists(c.out / "injections" / (s.stem + ".json")));
        write_grid(s.image, recon_dir / (s.stem + ".anomalous.f32g"));
    }
    for (const auto& s : load_test_data(c)) write_grid(s.image, recon_dir / (s.stem + ".healthy.f32g"));

    c.models = {parse_model_spec("external:" + recon_dir.string() + ":copy")};
    c.export_injections = false;
    c.out = dir / "second";
    const auto external_rows = run_experiment(c).rows;
    ASSERT_EQ(external_rows.size(), identity_rows.size());
    for (std::size_t i = 0; i < external_rows.size(); ++i) {
        EXPECT_EQ(external_rows[i].model, "copy");
        EXPECT_EQ(external_rows[i].mean_ap, identity_rows[i].mean_ap);
    }
}

TEST(HarnessTest, InjectionKeyFormat) {
    EXPECT_EQ(injection_key("img_7", 0.5), "img_7__intensity_0.5000");
    EXPECT_EQ(injection_key("x", 0.05), "x__intensity_0.0500");
}

TEST(HarnessTest, HisteqNeedsMasks) {
    Dataset d = make_phantom_set(0, DatasetRole::kTest, 2, 64);
    SweepConfig c = small(ExperimentId::kExp1Histeq);
    EXPECT_EQ(run_histeq_variant(c, d).rows.size(), 9u);
    d[1].mask.reset();
    try {
        run_histeq_variant(c, d);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kInvalidMask);
    }
}

TEST(ScoreCsvTest, WriteReadRoundTrip) {
    testing::TempDir dir;
    std::vector<ScoreRow> rows(2);
    rows[0] = {ExperimentId::kExp1, "intensity", 0.25, 2.0, "blur", "healthy", std::nullopt, 0.5, 0.1, 0.02, 100, 7};
    rows[1] = {ExperimentId::kExp3Anomalous, "intensity", 1.0, std::nullopt, "subspace", "anomalous", 64, 1, 0, std::nullopt, 3, 0};
    {
        std::ofstream out(dir / "s.csv");
        write_score_csv(rows, out);
    }
    std::ifstream in(dir / "s.csv");
    std::string header, line;
    std::getline(in, header);
    EXPECT_EQ(header, "experiment,kind,intensity,sigma,model,mode,k,mean_ap,ap_std,mean_recon_err,n_images,seed");
    std::getline(in, line);
    EXPECT_EQ(line, "exp1,intensity,0.25,2,blur,healthy,,0.5000000000,0.1000000000,0.0200000000,100,7");
    const auto back = read_score_csv(dir / "s.csv");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].k, 64u);
    EXPECT_FALSE(back[1].sigma);
    EXPECT_FALSE(back[1].mean_recon_err);
    EXPECT_EQ(back[0].intensity, 0.25);
    EXPECT_EQ(back[1].series(), "subspace:64");
    EXPECT_THROW(read_score_csv(dir / "absent.csv"), Error);
}

TEST(PanelTest, CellGrammar) {
    const PanelCell cell = parse_panel_cell("3/intensity/0.9/external:/a/b:vq/anomalous");
    EXPECT_EQ(cell.image, 3u);
    EXPECT_EQ(cell.intensity, 0.9);
    EXPECT_EQ(cell.model.kind, ModelSpec::Kind::kExternal);
    EXPECT_EQ(cell.model.path, "/a/b");
    EXPECT_EQ(cell.mode, ReconMode::kAnomalous);
    EXPECT_THROW(parse_panel_cell("3/intensity/0.9"), Error);
}

TEST(PanelTest, MontageBytes) {
    const Grid a(1, 2, std::vector<float>{0.0f, 1.0f});
    const Grid b(1, 2, std::vector<float>{0.5f, 2.0f});
    const auto bytes = encode_montage({&a, &b});
    const std::string header = "P5\n4 1\n255\n";
    ASSERT_EQ(bytes.size(), header.size() + 4);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + header.size()), header);
    EXPECT_EQ(bytes[header.size() + 0], 0);
    EXPECT_EQ(bytes[header.size() + 1], 255);
    EXPECT_EQ(bytes[header.size() + 2], 128);
    EXPECT_EQ(bytes[header.size() + 3], 255);
}

TEST(PanelTest, EmitWritesGridsAndMontage) {
    testing::TempDir dir;
    SweepConfig c = small(ExperimentId::kExp1);
    c.out = dir.path();
    emit_panels(c, {parse_panel_cell("1/intensity/0.9/blur:2/healthy"), parse_panel_cell("0/shuffle/0/identity/anomalous")});
    const auto panels = dir / "panels";
    const Grid input = read_grid(panels / "panel_00_input.f32g");
    const Grid recon = read_grid(panels / "panel_00_recon.f32g");
    const Grid resid = read_grid(panels / "panel_00_residual.f32g");
    EXPECT_EQ(resid, residual_map(input, recon).scores);
    EXPECT_TRUE(std::filesystem::exists(panels / "panel_01.pgm"));
    EXPECT_TRUE(std::filesystem::exists(panels / "index.txt"));
    // identity in anomalous mode reproduces the input, so the residual is blank.
    const Grid blank = read_grid(panels / "panel_01_residual.f32g");
    EXPECT_EQ(blank.max_value(), 0.0f);
    EXPECT_EQ(std::filesystem::file_size(panels / "panel_00.pgm"), std::string("P5\n192 64\n255\n").size() + 192 * 64);
    EXPECT_THROW(emit_panels(c, {parse_panel_cell("9/intensity/0.9/identity/healthy")}), Error);
}

TEST(RunExperimentTest, WritesSnapshotTableAndPlots) {
    testing::TempDir dir;
    SweepConfig c = small(ExperimentId::kExp3Healthy);
    c.modes = {ReconMode::kHealthy, ReconMode::kAnomalous};
    c.out = dir / "run";
    run_experiment(c);
    for (const char* f : {"config.resolved.cfg", "exp3.csv", "exp3_error_vs_ap.csv", "exp3_best_sigma.csv",
                          "exp3-healthy_lines.svg", "exp3-anomalous_scatter.svg"}) {
        EXPECT_TRUE(std::filesystem::exists(c.out / f)) << f;
    }
    SweepConfig again = default_config(ExperimentId::kExp1);
    load_config_file(again, c.out / "config.resolved.cfg");
    again.out = dir / "rerun";
    run_experiment(again);
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    EXPECT_EQ(slurp(c.out / "exp3.csv"), slurp(again.out / "exp3.csv"));
    EXPECT_EQ(slurp(c.out / "exp3-anomalous_lines.svg"), slurp(again.out / "exp3-anomalous_lines.svg"));
}

}  // namespace
}  // namespace reslab
