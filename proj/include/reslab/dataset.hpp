#pragma once

#include "reslab/grid.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reslab {

enum class DatasetRole { kTrain, kTest };

const char* to_string(DatasetRole role);

struct ManifestEntry {
    std::filesystem::path image;
    std::optional<std::filesystem::path> mask;
};

/// Ordered list of image (and optional object-mask) files. Entry order is the
/// canonical iteration order for every sweep.
///
/// Text format: one path per line relative to the manifest's directory,
/// `<image>\t<mask>` for pairs, `#` starts a comment. A leading
/// `# role: train|test` comment records the role.
struct DatasetManifest {
    DatasetRole role = DatasetRole::kTest;
    std::vector<ManifestEntry> entries;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
/// Paths are written relative to the manifest's directory when possible.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct Sample {
    std::string stem;
    Grid image;
    std::optional<BinaryMask> mask;

    /// The explicit mask, or the non-zero pixels when none was supplied.
    BinaryMask object_mask() const { return mask ? *mask : nonzero_mask(image); }
};

using Dataset = std::vector<Sample>;

/// Loads every entry; missing or malformed files surface with their path.
Dataset load_dataset(const DatasetManifest& manifest);

}  // namespace reslab
