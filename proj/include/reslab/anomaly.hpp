#pragma once

#include "reslab/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace reslab {

/// Disk-shaped anomaly region: center (row, col) and radius, in pixels.
struct RegionSpec {
    double row = 0.0;
    double col = 0.0;
    double radius = 0.0;

    friend bool operator==(const RegionSpec&, const RegionSpec&) = default;
};

enum class AnomalyKind { kIntensity, kSink, kSource, kShuffle };

const char* to_string(AnomalyKind kind);
AnomalyKind parse_anomaly_kind(std::string_view text);

struct InjectionRecord {
    Grid image;
    BinaryMask truth;
    AnomalyKind kind = AnomalyKind::kIntensity;
    std::optional<double> intensity;
    RegionSpec region;
    std::uint64_t seed = 0;
};

/// Uniformly picks a center among pixels whose (2*floor(radius)+1)-square
/// neighbourhood lies inside the object mask, so the whole disk is object.
RegionSpec sample_region(const BinaryMask& object_mask, double radius, std::uint64_t seed);

/// Closed disk: pixel (i,j) is set iff its distance to the center is <= radius.
BinaryMask rasterize_disk(const RegionSpec& region, std::size_t height, std::size_t width);

/// Bilinear interpolation; the point is clamped into [0,H-1]x[0,W-1] first.
float bilinear_sample(const Grid& grid, double row, double col);

InjectionRecord inject_intensity(const Grid& source, const RegionSpec& region, double intensity);
/// Pixels move away from the center: J <- source(J + (1 - s)(J - c)), s = |J - c| / r.
InjectionRecord inject_sink(const Grid& source, const RegionSpec& region);
/// Pixels move towards the center: J <- source(c + s(J - c)).
InjectionRecord inject_source(const Grid& source, const RegionSpec& region);
/// Seeded Fisher-Yates permutation of the disk's pixel values.
InjectionRecord inject_shuffle(const Grid& source, const RegionSpec& region, std::uint64_t seed);

/// Dispatch on kind; `intensity` is only read for kIntensity.
InjectionRecord inject(AnomalyKind kind, const Grid& source, const RegionSpec& region, double intensity,
                       std::uint64_t seed);

/// Writes `<stem>.f32g`, `<stem>.maskg` and the `<stem>.json` sidecar
/// {kind, intensity, center, radius, seed, source} into `dir`.
void write_injection(const InjectionRecord& record, const std::filesystem::path& dir, const std::string& stem,
                     const std::string& source_stem = {});

}  // namespace reslab
