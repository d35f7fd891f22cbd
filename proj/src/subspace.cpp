#include "reslab/subspace.hpp"

#include "reslab/errors.hpp"
#include "reslab/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

namespace reslab {

namespace {

constexpr double kRelativeEigenFloor = 1e-10;

void round_to_float(Eigen::Ref<Eigen::MatrixXd> m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<double>(static_cast<float>(m(i, j)));
    }
}

// Modified Gram-Schmidt of column `j` against columns [0, j); returns the
// remaining norm before normalization.
double orthonormalize_column(Eigen::MatrixXd& basis, Eigen::Index j) {
    for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index i = 0; i < j; ++i) {
            basis.col(j) -= basis.col(i).dot(basis.col(j)) * basis.col(i);
        }
    }
    const double norm = basis.col(j).norm();
    if (norm > 0.0) basis.col(j) /= norm;
    return norm;
}

Grid to_grid(const Shape& shape, const Eigen::VectorXd& v) {
    std::vector<float> px(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) px[static_cast<std::size_t>(i)] = static_cast<float>(v(i));
    return Grid(shape.height, shape.width, std::move(px));
}

}  // namespace

Eigen::VectorXd to_vector(const Grid& grid) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) v(static_cast<Eigen::Index>(i)) = grid[i];
    return v;
}

SubspaceModel::SubspaceModel(Shape shape, Eigen::VectorXd mean, Eigen::MatrixXd basis, std::string fingerprint)
    : shape_(shape), mean_(std::move(mean)), basis_(std::move(basis)), fingerprint_(std::move(fingerprint)) {
    const auto n = static_cast<Eigen::Index>(shape_.size());
    require(mean_.size() == n, ErrorCode::kShapeMismatch, "subspace mean does not match the image shape");
    require(basis_.rows() == n || basis_.cols() == 0, ErrorCode::kShapeMismatch,
            "subspace basis rows do not match the image shape");
    if (basis_.cols() == 0) basis_.resize(n, 0);
}

Eigen::MatrixXd SubspaceModel::project(const Eigen::MatrixXd& images) const {
    Eigen::MatrixXd centered = images.colwise() - mean_;
    Eigen::MatrixXd out = images;
    if (k() == 0) {
        out.colwise() = mean_;
        return out;
    }
    const Eigen::MatrixXd codes = basis_.transpose() * centered;
    out.noalias() = basis_ * codes;
    out.colwise() += mean_;
    return out;
}

Eigen::VectorXd SubspaceModel::project(const Grid& image) const {
    require_same_shape(image.shape(), shape_, "subspace reconstruct");
    return project(Eigen::MatrixXd(to_vector(image))).col(0);
}

Grid SubspaceModel::reconstruct(const Grid& image) const {
    return to_grid(shape_, project(image).cwiseMax(0.0).cwiseMin(1.0));
}

std::vector<Grid> SubspaceModel::reconstruct(std::span<const Grid> images) const {
    Eigen::MatrixXd cols(static_cast<Eigen::Index>(shape_.size()), static_cast<Eigen::Index>(images.size()));
    for (std::size_t j = 0; j < images.size(); ++j) {
        require_same_shape(images[j].shape(), shape_, "subspace reconstruct");
        cols.col(static_cast<Eigen::Index>(j)) = to_vector(images[j]);
    }
    const Eigen::MatrixXd proj = project(cols).cwiseMax(0.0).cwiseMin(1.0);
    std::vector<Grid> out;
    out.reserve(images.size());
    for (std::size_t j = 0; j < images.size(); ++j) out.push_back(to_grid(shape_, proj.col(static_cast<Eigen::Index>(j))));
    return out;
}

std::string dataset_fingerprint(const Dataset& data) {
    std::uint64_t h = fnv1a64("reslab-dataset");
    for (const auto& s : data) {
        h = fnv1a64(s.stem, h);
        const auto bytes = encode_grid(s.image);
        h = fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), h);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SubspaceModel fit_subspace(const Dataset& train, std::size_t k, std::uint64_t seed) {
    require(!train.empty(), ErrorCode::kEmptyInput, "fit_subspace: training set is empty");
    require(k <= train.size(), ErrorCode::kInvalidArgument,
            "fit_subspace: k=" + std::to_string(k) + " exceeds the " + std::to_string(train.size()) +
                " training images");
    const Shape shape = train.front().image.shape();
    for (const auto& s : train) require_same_shape(s.image.shape(), shape, ("fit_subspace: " + s.stem).c_str());

    const auto d = static_cast<Eigen::Index>(shape.size());
    const auto n = static_cast<Eigen::Index>(train.size());
    Eigen::MatrixXd X(d, n);
    for (Eigen::Index j = 0; j < n; ++j) X.col(j) = to_vector(train[static_cast<std::size_t>(j)].image);
    Eigen::VectorXd mean = X.rowwise().mean();
    X.colwise() -= mean;

    Eigen::MatrixXd basis(d, static_cast<Eigen::Index>(k));
    Eigen::Index filled = 0;
    if (k > 0) {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
        gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
        const double floor = std::max(lambda(n - 1), 0.0) * kRelativeEigenFloor;
        for (Eigen::Index r = n - 1; r >= 0 && filled < static_cast<Eigen::Index>(k); --r) {
            if (!(lambda(r) > floor) || lambda(r) <= 0.0) break;
            basis.col(filled) = X * eig.eigenvectors().col(r) / std::sqrt(lambda(r));
            if (orthonormalize_column(basis, filled) < 0.5) break;
            ++filled;
        }
    }
    SplitMix64 rng(seed);
    while (filled < static_cast<Eigen::Index>(k)) {
        for (Eigen::Index i = 0; i < d; ++i) basis(i, filled) = rng.uniform(-1.0, 1.0);
        if (orthonormalize_column(basis, filled) > 1e-3) ++filled;
    }
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        Eigen::Index arg = 0;
        basis.col(j).cwiseAbs().maxCoeff(&arg);
        if (basis(arg, j) < 0.0) basis.col(j) = -basis.col(j);
    }
    round_to_float(basis);
    round_to_float(mean);
    return SubspaceModel(shape, std::move(mean), std::move(basis), dataset_fingerprint(train));
}

SubspaceModel fit_subspace(const DatasetManifest& train, std::size_t k, std::uint64_t seed) {
    return fit_subspace(load_dataset(train), k, seed);
}

void save_subspace(const SubspaceModel& model, const std::filesystem::path& path) {
    const std::filesystem::path payload = path.stem().string() + ".f32gs";
    nlohmann::ordered_json j;
    j["format"] = "reslab-subspace";
    j["version"] = 1;
    j["k"] = model.k();
    j["shape"] = {model.shape().height, model.shape().width};
    j["fingerprint"] = model.fingerprint();
    j["payload"] = payload.string();
    {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot write model header");
        out << j.dump(2) << "\n";
    }
    std::ofstream out(path.parent_path() / payload, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, (path.parent_path() / payload).string() + ": cannot write model payload");
    auto put = [&](const Eigen::VectorXd& v) {
        const auto bytes = encode_grid(to_grid(model.shape(), v));
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    };
    put(model.mean());
    for (Eigen::Index c = 0; c < model.basis().cols(); ++c) put(model.basis().col(c));
    if (!out) throw Error(ErrorCode::kIo, "model payload write failed");
}

SubspaceModel load_subspace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kMissingFile, path.string() + ": cannot open model header");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kInvalidArgument, path.string() + ": malformed model header: " + e.what());
    }
    if (j.value("format", "") != "reslab-subspace") {
        throw Error(ErrorCode::kBadMagic, path.string() + ": not a subspace model header");
    }
    const auto k = j.at("k").get<std::size_t>();
    const Shape shape{j.at("shape").at(0).get<std::size_t>(), j.at("shape").at(1).get<std::size_t>()};
    const auto payload_path = path.parent_path() / j.at("payload").get<std::string>();

    std::ifstream pin(payload_path, std::ios::binary);
    if (!pin) throw Error(ErrorCode::kMissingFile, payload_path.string() + ": cannot open model payload");
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(pin), std::istreambuf_iterator<char>()};
    std::size_t offset = 0;
    const Grid mean = decode_grid(bytes, offset, payload_path.string());
    require_same_shape(mean.shape(), shape, "subspace mean");
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(shape.size()), static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) {
        const Grid col = decode_grid(bytes, offset, payload_path.string());
        require_same_shape(col.shape(), shape, "subspace basis column");
        basis.col(static_cast<Eigen::Index>(c)) = to_vector(col);
    }
    return SubspaceModel(shape, to_vector(mean), std::move(basis), j.value("fingerprint", ""));
}

}  // namespace reslab
