#include "reslab/reconstruct.hpp"

#include "reslab/blur.hpp"
#include "reslab/errors.hpp"

#include <cmath>

namespace reslab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

const char* to_string(ReconMode mode) { return mode == ReconMode::kHealthy ? "healthy" : "anomalous"; }

ReconMode parse_recon_mode(std::string_view text) {
    if (text == "healthy") return ReconMode::kHealthy;
    if (text == "anomalous") return ReconMode::kAnomalous;
    throw Error(ErrorCode::kInvalidArgument, "unknown reconstruction mode '" + std::string(text) + "'");
}

std::filesystem::path ExternalReconSource::path_for(std::string_view key, ReconMode mode) const {
    return dir / (std::string(key) + "." + to_string(mode) + ".f32g");
}

std::string model_name(const Reconstructor& model) {
    return std::visit(overloaded{
                          [](const IdentityModel&) -> std::string { return "identity"; },
                          [](const BlurOracle&) -> std::string { return "blur"; },
                          [](const std::shared_ptr<const SubspaceModel>&) -> std::string { return "subspace"; },
                          [](const ExternalReconSource& e) -> std::string {
                              return e.name.empty() ? "external" : e.name;
                          },
                      },
                      model);
}

Grid reconstruct(const Reconstructor& model, const Grid& input, std::string_view key, ReconMode mode) {
    return std::visit(overloaded{
                          [&](const IdentityModel&) { return input; },
                          [&](const BlurOracle& b) { return gaussian_blur(input, b.sigma); },
                          [&](const std::shared_ptr<const SubspaceModel>& m) { return m->reconstruct(input); },
                          [&](const ExternalReconSource& e) {
                              const auto path = e.path_for(key, mode);
                              if (!std::filesystem::exists(path)) {
                                  throw Error(ErrorCode::kMissingReconstruction,
                                              "missing external reconstruction " + path.string());
                              }
                              Grid g = read_grid(path);
                              require_same_shape(g.shape(), input.shape(), path.string().c_str());
                              return g;
                          },
                      },
                      model);
}

std::vector<std::string> missing_reconstructions(const Reconstructor& model, const std::vector<std::string>& keys,
                                                 ReconMode mode) {
    std::vector<std::string> missing;
    if (const auto* e = std::get_if<ExternalReconSource>(&model)) {
        for (const auto& key : keys) {
            if (!std::filesystem::exists(e->path_for(key, mode))) missing.push_back(key);
        }
    }
    return missing;
}

double masked_mean_abs_diff(const Grid& a, const Grid& b, const BinaryMask& mask) {
    require_same_shape(a.shape(), b.shape(), "masked_mean_abs_diff");
    require_same_shape(a.shape(), mask.shape(), "masked_mean_abs_diff mask");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!mask[i]) continue;
        sum += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
        ++n;
    }
    require(n > 0, ErrorCode::kEmptyMask, "masked_mean_abs_diff: mask is empty");
    return sum / static_cast<double>(n);
}

ReconstructionErrorStats healthy_recon_error(const Reconstructor& model, const Dataset& test) {
    require(!test.empty(), ErrorCode::kEmptyInput, "healthy_recon_error: test set is empty");
    ReconstructionErrorStats st;
    st.per_image.reserve(test.size());
    double sum = 0.0;
    for (const auto& s : test) {
        const Grid recon = reconstruct(model, s.image, s.stem, ReconMode::kHealthy);
        st.per_image.push_back(masked_mean_abs_diff(s.image, recon, s.object_mask()));
        sum += st.per_image.back();
    }
    st.mean = sum / static_cast<double>(test.size());
    return st;
}

ReconstructionErrorStats healthy_recon_error(const Reconstructor& model, const DatasetManifest& test) {
    require(!test.entries.empty(), ErrorCode::kEmptyInput, "healthy_recon_error: manifest is empty");
    return healthy_recon_error(model, load_dataset(test));
}

}  // namespace reslab
