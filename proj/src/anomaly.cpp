#include "reslab/anomaly.hpp"

#include "reslab/errors.hpp"
#include "reslab/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

namespace reslab {

namespace {

void require_disk_in_bounds(const RegionSpec& region, std::size_t height, std::size_t width) {
    require(region.radius > 0.0 && std::isfinite(region.radius), ErrorCode::kInvalidArgument,
            "region radius must be positive");
    const bool inside = std::ceil(region.row - region.radius) >= 0.0 &&
                        std::floor(region.row + region.radius) <= static_cast<double>(height) - 1.0 &&
                        std::ceil(region.col - region.radius) >= 0.0 &&
                        std::floor(region.col + region.radius) <= static_cast<double>(width) - 1.0;
    require(inside, ErrorCode::kOutOfBounds, "disk does not fit inside the image");
}

InjectionRecord start_record(const Grid& source, const RegionSpec& region, AnomalyKind kind) {
    require_disk_in_bounds(region, source.height(), source.width());
    InjectionRecord rec;
    rec.image = source;
    rec.truth = rasterize_disk(region, source.height(), source.width());
    rec.kind = kind;
    rec.region = region;
    return rec;
}

// Radial warp shared by sink and source: `target` maps (J, s) to the sample point V.
template <typename Target>
InjectionRecord deform(const Grid& source, const RegionSpec& region, AnomalyKind kind, Target target) {
    InjectionRecord rec = start_record(source, region, kind);
    for (std::size_t i = 0; i < source.height(); ++i) {
        for (std::size_t j = 0; j < source.width(); ++j) {
            if (!rec.truth(i, j)) continue;
            const double dr = static_cast<double>(i) - region.row;
            const double dc = static_cast<double>(j) - region.col;
            const double s = std::hypot(dr, dc) / region.radius;
            const auto [vr, vc] = target(dr, dc, s);
            rec.image(i, j) = bilinear_sample(source, vr, vc);
        }
    }
    return rec;
}

}  // namespace

const char* to_string(AnomalyKind kind) {
    switch (kind) {
        case AnomalyKind::kIntensity: return "intensity";
        case AnomalyKind::kSink: return "sink";
        case AnomalyKind::kSource: return "source";
        case AnomalyKind::kShuffle: return "shuffle";
    }
    return "unknown";
}

AnomalyKind parse_anomaly_kind(std::string_view text) {
    if (text == "intensity") return AnomalyKind::kIntensity;
    if (text == "sink") return AnomalyKind::kSink;
    if (text == "source") return AnomalyKind::kSource;
    if (text == "shuffle") return AnomalyKind::kShuffle;
    throw Error(ErrorCode::kInvalidArgument, "unknown anomaly kind '" + std::string(text) + "'");
}

RegionSpec sample_region(const BinaryMask& object_mask, double radius, std::uint64_t seed) {
    require(radius > 0.0 && std::isfinite(radius), ErrorCode::kInvalidArgument, "sample_region: radius must be > 0");
    const std::size_t H = object_mask.height(), W = object_mask.width();
    const auto half = static_cast<std::size_t>(std::floor(radius));

    // Summed-area table over the mask; a center is admissible when its whole
    // (2*half+1)^2 box is inside the image and fully masked.
    std::vector<std::size_t> sat((H + 1) * (W + 1), 0);
    for (std::size_t r = 0; r < H; ++r) {
        std::size_t row_sum = 0;
        for (std::size_t c = 0; c < W; ++c) {
            row_sum += object_mask(r, c) ? 1 : 0;
            sat[(r + 1) * (W + 1) + c + 1] = sat[r * (W + 1) + c + 1] + row_sum;
        }
    }
    const std::size_t box = (2 * half + 1) * (2 * half + 1);
    std::vector<std::size_t> admissible;
    if (H > 2 * half && W > 2 * half) {
        for (std::size_t r = half; r + half < H; ++r) {
            for (std::size_t c = half; c + half < W; ++c) {
                const std::size_t r0 = r - half, r1 = r + half + 1, c0 = c - half, c1 = c + half + 1;
                const std::size_t inside = sat[r1 * (W + 1) + c1] - sat[r0 * (W + 1) + c1] -
                                           sat[r1 * (W + 1) + c0] + sat[r0 * (W + 1) + c0];
                if (inside == box) admissible.push_back(r * W + c);
            }
        }
    }
    if (admissible.empty()) {
        throw Error(ErrorCode::kNoAdmissibleCenter,
                    "sample_region: no center admits a disk of radius " + std::to_string(radius) + " inside the object");
    }
    SplitMix64 rng(seed);
    const std::size_t pick = admissible[rng.below(admissible.size())];
    return RegionSpec{static_cast<double>(pick / W), static_cast<double>(pick % W), radius};
}

BinaryMask rasterize_disk(const RegionSpec& region, std::size_t height, std::size_t width) {
    require_disk_in_bounds(region, height, width);
    BinaryMask disk(height, width);
    const double r2 = region.radius * region.radius;
    const auto r_lo = static_cast<std::size_t>(std::ceil(region.row - region.radius));
    const auto r_hi = static_cast<std::size_t>(std::floor(region.row + region.radius));
    const auto c_lo = static_cast<std::size_t>(std::ceil(region.col - region.radius));
    const auto c_hi = static_cast<std::size_t>(std::floor(region.col + region.radius));
    for (std::size_t i = r_lo; i <= r_hi; ++i) {
        for (std::size_t j = c_lo; j <= c_hi; ++j) {
            const double dr = static_cast<double>(i) - region.row;
            const double dc = static_cast<double>(j) - region.col;
            if (dr * dr + dc * dc <= r2) disk.set(i, j, true);
        }
    }
    return disk;
}

float bilinear_sample(const Grid& grid, double row, double col) {
    const double max_r = static_cast<double>(grid.height() - 1);
    const double max_c = static_cast<double>(grid.width() - 1);
    row = std::clamp(row, 0.0, max_r);
    col = std::clamp(col, 0.0, max_c);
    const auto r0 = static_cast<std::size_t>(std::floor(row));
    const auto c0 = static_cast<std::size_t>(std::floor(col));
    const std::size_t r1 = std::min(r0 + 1, grid.height() - 1);
    const std::size_t c1 = std::min(c0 + 1, grid.width() - 1);
    const double fr = row - static_cast<double>(r0);
    const double fc = col - static_cast<double>(c0);
    const double top = (1.0 - fc) * grid(r0, c0) + fc * grid(r0, c1);
    const double bottom = (1.0 - fc) * grid(r1, c0) + fc * grid(r1, c1);
    return static_cast<float>((1.0 - fr) * top + fr * bottom);
}

InjectionRecord inject_intensity(const Grid& source, const RegionSpec& region, double intensity) {
    require(intensity >= 0.0 && intensity <= 1.0, ErrorCode::kInvalidArgument,
            "inject_intensity: intensity must lie in [0,1]");
    InjectionRecord rec = start_record(source, region, AnomalyKind::kIntensity);
    rec.intensity = intensity;
    const auto value = static_cast<float>(intensity);
    for (std::size_t i = 0; i < source.size(); ++i) {
        if (rec.truth[i]) rec.image[i] = value;
    }
    return rec;
}

InjectionRecord inject_sink(const Grid& source, const RegionSpec& region) {
    return deform(source, region, AnomalyKind::kSink, [&](double dr, double dc, double s) {
        const double row = region.row + dr + (1.0 - s) * dr;
        const double col = region.col + dc + (1.0 - s) * dc;
        return std::pair{row, col};
    });
}

InjectionRecord inject_source(const Grid& source, const RegionSpec& region) {
    return deform(source, region, AnomalyKind::kSource, [&](double dr, double dc, double s) {
        return std::pair{region.row + s * dr, region.col + s * dc};
    });
}

InjectionRecord inject_shuffle(const Grid& source, const RegionSpec& region, std::uint64_t seed) {
    InjectionRecord rec = start_record(source, region, AnomalyKind::kShuffle);
    rec.seed = seed;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < source.size(); ++i) {
        if (rec.truth[i]) idx.push_back(i);
    }
    std::vector<std::size_t> perm = idx;
    SplitMix64 rng(seed);
    for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.below(i)]);
    }
    for (std::size_t n = 0; n < idx.size(); ++n) rec.image[idx[n]] = source[perm[n]];
    return rec;
}

InjectionRecord inject(AnomalyKind kind, const Grid& source, const RegionSpec& region, double intensity,
                       std::uint64_t seed) {
    InjectionRecord rec;
    switch (kind) {
        case AnomalyKind::kIntensity: rec = inject_intensity(source, region, intensity); break;
        case AnomalyKind::kSink: rec = inject_sink(source, region); break;
        case AnomalyKind::kSource: rec = inject_source(source, region); break;
        case AnomalyKind::kShuffle: rec = inject_shuffle(source, region, seed); break;
    }
    rec.seed = seed;
    return rec;
}

void write_injection(const InjectionRecord& record, const std::filesystem::path& dir, const std::string& stem,
                     const std::string& source_stem) {
    write_grid(record.image, dir / (stem + ".f32g"));
    write_mask(record.truth, dir / (stem + ".maskg"));
    nlohmann::ordered_json j;
    j["kind"] = to_string(record.kind);
    j["I"] = record.intensity ? nlohmann::ordered_json(*record.intensity) : nlohmann::ordered_json(nullptr);
    j["center"] = {record.region.row, record.region.col};
    j["radius"] = record.region.radius;
    j["seed"] = record.seed;
    if (!source_stem.empty()) j["source"] = source_stem;
    std::ofstream out(dir / (stem + ".json"), std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, (dir / (stem + ".json")).string() + ": cannot write sidecar");
    out << j.dump(2) << "\n";
}

}  // namespace reslab
