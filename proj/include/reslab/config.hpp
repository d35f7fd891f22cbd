#pragma once

#include "reslab/anomaly.hpp"
#include "reslab/dataset.hpp"
#include "reslab/reconstruct.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reslab {

enum class ExperimentId { kExp1, kExp2, kExp3Healthy, kExp3Anomalous, kExp1Histeq };

const char* to_string(ExperimentId id);
ExperimentId parse_experiment_id(std::string_view text);

enum class EvalMaskPolicy { kFull, kObject };

const char* to_string(EvalMaskPolicy policy);
EvalMaskPolicy parse_eval_mask_policy(std::string_view text);

/// A reconstructor as written in a config: `identity`, `blur:<sigma>`,
/// `subspace:<k>` (fitted on the training set), `subspace-file:<path>` or
/// `external:<dir>[:<name>]`.
struct ModelSpec {
    enum class Kind { kIdentity, kBlur, kSubspace, kSubspaceFile, kExternal };

    Kind kind = Kind::kIdentity;
    double sigma = 0.0;
    std::size_t k = 0;
    std::filesystem::path path;
    std::string name;

    std::string text() const;
    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

ModelSpec parse_model_spec(std::string_view text);

/// Where a dataset comes from: a manifest when set, else generated phantoms.
struct DataSource {
    std::optional<std::filesystem::path> manifest;
    std::size_t phantom_count = 0;
};

/// One declarative sweep. Unused fields are ignored by experiments that do
/// not need them.
struct SweepConfig {
    ExperimentId experiment = ExperimentId::kExp1;
    DataSource test{std::nullopt, 100};
    DataSource train{std::nullopt, 500};
    std::size_t phantom_size = 128;
    std::uint64_t phantom_seed = 0;

    std::vector<double> intensities;
    std::vector<double> sigmas;
    std::vector<AnomalyKind> kinds;
    std::optional<double> reference_intensity;  // exp2; unset means the test set's object mean
    double radius = 20.0;
    std::vector<ModelSpec> models;              // exp3
    std::vector<ReconMode> modes;               // exp3
    bool match_sigma = true;                    // exp3: fit blur curves for best-matching sigma
    bool export_injections = false;             // exp3: write anomalous inputs for external models

    std::uint64_t seed = 0;
    EvalMaskPolicy eval_mask = EvalMaskPolicy::kFull;
    std::vector<std::string> panels;            // panel cells, see parse_panel_cell
    std::filesystem::path out = "out";
    unsigned threads = 0;                       // 0: resolve from environment
};

/// Defaults for every grid: I in 0..1 step 0.05, sigma in {0, 0.25, 0.5, 1, 2, 3, 5},
/// kinds {sink, source, shuffle, intensity}, models {subspace:4, 16, 64, 256}.
/// The exp3 runner scores every mode in `modes`; it defaults to the mode named
/// by the experiment id.
SweepConfig default_config(ExperimentId id);

/// Applies one `key = value` setting. Relative paths resolve against `base`
/// (or the working directory when `base` is empty) and are stored absolute.
/// Unknown keys and malformed values throw kConfig.
void apply_setting(SweepConfig& config, std::string_view key, std::string_view value,
                   const std::filesystem::path& base);

/// Reads a config file on top of `config`. Grammar: one `key = value` per line,
/// `#` starts a comment, lists are comma separated, an intensity or sigma list
/// may also be written `start:stop:step`.
void load_config_file(SweepConfig& config, const std::filesystem::path& path);

/// Throws kConfig when grids are empty, unsorted or out of range, or when the
/// experiment lacks a field it needs.
void validate(const SweepConfig& config);

/// Resolved settings in the same grammar, so the snapshot can be re-run.
/// The thread count is left out because it never affects results.
std::string format_config(const SweepConfig& config);

/// `start:stop:step` expanded as start + i * step, inclusive of stop.
std::vector<double> expand_range(double start, double stop, double step);

}  // namespace reslab
