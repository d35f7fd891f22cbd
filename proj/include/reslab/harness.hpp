#pragma once

#include "reslab/anomaly.hpp"
#include "reslab/config.hpp"
#include "reslab/dataset.hpp"
#include "reslab/reconstruct.hpp"
#include "reslab/scoring.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace reslab {

/// Intensity window of the mid-intensity trough used by the summaries.
inline constexpr double kTroughLow = 0.2;
inline constexpr double kTroughHigh = 0.6;

/// One cell of a sweep, aggregated over the test images.
struct ScoreRow {
    ExperimentId experiment = ExperimentId::kExp1;
    std::string kind;
    std::optional<double> intensity;
    std::optional<double> sigma;
    std::string model;
    std::string mode;
    std::optional<std::size_t> k;
    double mean_ap = 0.0;
    double ap_std = 0.0;
    std::optional<double> mean_recon_err;
    std::size_t n_images = 0;
    std::uint64_t seed = 0;

    /// Series label for plots: the model plus its k or sigma.
    std::string series() const;
};

/// Header `experiment,kind,intensity,sigma,model,mode,k,mean_ap,ap_std,mean_recon_err,n_images,seed`;
/// non-applicable fields are empty.
void write_score_csv(const std::vector<ScoreRow>& rows, std::ostream& out);
std::vector<ScoreRow> read_score_csv(const std::filesystem::path& path);

/// Per-model pairing of healthy reconstruction error and detection quality.
struct ModelSummary {
    std::string model;
    std::optional<std::size_t> k;
    std::optional<double> sigma;
    ReconMode mode = ReconMode::kHealthy;
    double mean_recon_err = 0.0;
    double mean_ap = 0.0;    // over the whole intensity grid
    double trough_ap = 0.0;  // over intensities in [kTroughLow, kTroughHigh]
};

struct BestSigma {
    std::string model;
    std::optional<std::size_t> k;
    ReconMode mode = ReconMode::kHealthy;
    CurveMatch match;
};

struct ExperimentResult {
    std::vector<ScoreRow> rows;
    std::vector<ModelSummary> summaries;   // exp3 only
    std::vector<BestSigma> best_sigma;     // exp3 with match_sigma
};

/// A test image with its object mask and the anomaly region shared by all
/// cells of every experiment.
struct PreparedImage {
    std::string stem;
    Grid image;
    BinaryMask object;
    RegionSpec region;
    BinaryMask truth;
};

Dataset load_test_data(const SweepConfig& config);
Dataset load_train_data(const SweepConfig& config);

/// Region per image from derive_seed(seed, "region", index); errors name the image.
std::vector<PreparedImage> prepare_images(const Dataset& data, double radius, std::uint64_t seed);

/// Mean over images of the per-image object mean.
double mean_object_intensity(const Dataset& data);

/// Key of an exp3 anomalous input: `<stem>__intensity_<I with 4 decimals>`.
std::string injection_key(const std::string& stem, double intensity);

ExperimentResult run_exp1(const SweepConfig& config);
ExperimentResult run_exp2(const SweepConfig& config);
/// Scores every mode in config.modes.
ExperimentResult run_exp3(const SweepConfig& config);
ExperimentResult run_histeq_variant(const SweepConfig& config);

/// Same computations on an already loaded test set.
ExperimentResult run_exp1(const SweepConfig& config, const Dataset& test);
ExperimentResult run_exp2(const SweepConfig& config, const Dataset& test);
ExperimentResult run_exp3(const SweepConfig& config, const Dataset& test, const Dataset& train);
ExperimentResult run_histeq_variant(const SweepConfig& config, const Dataset& test);

/// Validates, runs the configured experiment and writes into config.out:
/// `config.resolved.cfg`, `<experiment>.csv`, the SVG plots and, for exp3,
/// `exp3_error_vs_ap.csv` and `exp3_best_sigma.csv`.
ExperimentResult run_experiment(const SweepConfig& config);

/// A qualitative panel cell: `<image index>/<kind>/<intensity>/<model>/<mode>`,
/// e.g. `3/intensity/0.9/blur:2/healthy`. The intensity is ignored for other kinds.
struct PanelCell {
    std::size_t image = 0;
    AnomalyKind kind = AnomalyKind::kIntensity;
    double intensity = 0.0;
    ModelSpec model;
    ReconMode mode = ReconMode::kHealthy;
};

PanelCell parse_panel_cell(const std::string& text);

/// For each cell writes `panel_NN_{input,recon,residual}.f32g` and an 8-bit
/// `panel_NN.pgm` montage (input | recon | residual) into `<out>/panels`, plus
/// `index.txt` listing the cells. Throws kInvalidArgument for bad cells.
void emit_panels(const SweepConfig& config, const std::vector<PanelCell>& cells);
void emit_panels(const SweepConfig& config, const std::vector<PanelCell>& cells, const Dataset& test,
                 const Dataset& train);

/// Binary PGM of grids side by side, each value mapped to round(clamp(v, 0, 1) * 255).
std::vector<std::uint8_t> encode_montage(const std::vector<const Grid*>& tiles);

}  // namespace reslab
