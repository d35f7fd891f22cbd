#pragma once

#include "reslab/dataset.hpp"
#include "reslab/grid.hpp"
#include "reslab/subspace.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace reslab {

/// Which image the generator sees: the healthy original or the anomalous input.
enum class ReconMode { kHealthy, kAnomalous };

const char* to_string(ReconMode mode);
ReconMode parse_recon_mode(std::string_view text);

/// Simulated imperfect generator: Gaussian blur of its input.
struct BlurOracle {
    double sigma = 0.0;
};

struct IdentityModel {};

/// Reconstructions produced elsewhere, stored as `<dir>/<key>.<mode>.f32g`.
struct ExternalReconSource {
    std::filesystem::path dir;
    std::string name;  // label used in result tables

    std::filesystem::path path_for(std::string_view key, ReconMode mode) const;
};

using Reconstructor =
    std::variant<IdentityModel, BlurOracle, std::shared_ptr<const SubspaceModel>, ExternalReconSource>;

/// Short model label for tables ("identity", "blur", "subspace", external name).
std::string model_name(const Reconstructor& model);

/// Reconstruction of `input`. `key`/`mode` only matter for external sources.
/// Throws kShapeMismatch on shape mismatches and kMissingReconstruction when an
/// external file is absent.
Grid reconstruct(const Reconstructor& model, const Grid& input, std::string_view key, ReconMode mode);

/// Lists the keys whose external reconstruction is missing (empty for other models).
std::vector<std::string> missing_reconstructions(const Reconstructor& model, const std::vector<std::string>& keys,
                                                 ReconMode mode);

struct ReconstructionErrorStats {
    std::vector<double> per_image;  // mean |x - g(x)| over object pixels
    double mean = 0.0;
};

/// Mean absolute residual of healthy-mode reconstructions over each image's object mask.
ReconstructionErrorStats healthy_recon_error(const Reconstructor& model, const Dataset& test);
ReconstructionErrorStats healthy_recon_error(const Reconstructor& model, const DatasetManifest& test);

/// Mean |a - b| over the pixels of `mask`.
double masked_mean_abs_diff(const Grid& a, const Grid& b, const BinaryMask& mask);

}  // namespace reslab
