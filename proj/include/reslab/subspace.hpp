#pragma once

#include "reslab/dataset.hpp"
#include "reslab/grid.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace reslab {

/// Linear-subspace reconstructor: mean image plus k orthonormal principal
/// directions of the centered training images. Immutable after fitting.
///
/// Mean and basis are stored at float32 precision (rounded once after the fit)
/// so that a saved-and-reloaded model is bit-identical to the fitted one.
class SubspaceModel {
public:
    SubspaceModel(Shape shape, Eigen::VectorXd mean, Eigen::MatrixXd basis, std::string fingerprint);

    const Shape& shape() const { return shape_; }
    std::size_t k() const { return static_cast<std::size_t>(basis_.cols()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& basis() const { return basis_; }
    const std::string& fingerprint() const { return fingerprint_; }

    /// mu + U U^T (x - mu) for each column of `images` (pixels x count); no clamping.
    Eigen::MatrixXd project(const Eigen::MatrixXd& images) const;
    Eigen::VectorXd project(const Grid& image) const;

    /// Projection clamped to [0,1].
    Grid reconstruct(const Grid& image) const;
    std::vector<Grid> reconstruct(std::span<const Grid> images) const;

private:
    Shape shape_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd basis_;
    std::string fingerprint_;
};

/// Hex FNV-1a digest of the stems, shapes and pixel bytes of a dataset, in order.
std::string dataset_fingerprint(const Dataset& data);

/// PCA through the n x n Gram matrix of the centered images. Directions with
/// vanishing variance are completed with seeded random vectors orthogonalized
/// against the rest, so exactly k columns are always returned. Each column's
/// largest-magnitude component is positive. Throws kShapeMismatch when image
/// shapes differ and kInvalidArgument when k exceeds the image count.
SubspaceModel fit_subspace(const Dataset& train, std::size_t k, std::uint64_t seed);
SubspaceModel fit_subspace(const DatasetManifest& train, std::size_t k, std::uint64_t seed);

/// JSON header at `path` plus a payload of concatenated .f32g records (mean,
/// then the k basis columns) next to it.
void save_subspace(const SubspaceModel& model, const std::filesystem::path& path);
SubspaceModel load_subspace(const std::filesystem::path& path);

Eigen::VectorXd to_vector(const Grid& grid);

}  // namespace reslab
