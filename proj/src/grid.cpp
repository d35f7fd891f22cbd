#include "reslab/grid.hpp"

#include "reslab/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

namespace reslab {

namespace {

constexpr std::array<char, 4> kGridMagic = {'F', '3', '2', 'G'};
constexpr std::array<char, 4> kMaskMagic = {'M', 'S', 'K', 'G'};
constexpr std::size_t kHeaderBytes = 16;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
    return static_cast<std::uint32_t>(bytes[at]) | (static_cast<std::uint32_t>(bytes[at + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes[at + 2]) << 16) | (static_cast<std::uint32_t>(bytes[at + 3]) << 24);
}

std::vector<std::uint8_t> encode(const std::array<char, 4>& magic, const Shape& shape,
                                 std::span<const float> values) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + 4 * values.size());
    for (char c : magic) out.push_back(static_cast<std::uint8_t>(c));
    put_u32(out, kGridFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(shape.height));
    put_u32(out, static_cast<std::uint32_t>(shape.width));
    for (float v : values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

struct Decoded {
    Shape shape;
    std::vector<float> values;
};

Decoded decode(std::span<const std::uint8_t> bytes, std::size_t& offset, const std::array<char, 4>& magic,
               const std::string& source) {
    if (bytes.size() < offset + kHeaderBytes) {
        if (bytes.size() >= offset + 4 &&
            !std::equal(magic.begin(), magic.end(), bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                        [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
            throw Error(ErrorCode::kBadMagic, source + ": bad magic");
        }
        throw Error(ErrorCode::kTruncated, source + ": truncated header");
    }
    for (std::size_t i = 0; i < 4; ++i) {
        if (bytes[offset + i] != static_cast<std::uint8_t>(magic[i])) {
            throw Error(ErrorCode::kBadMagic, source + ": bad magic, expected " + std::string(magic.data(), 4));
        }
    }
    const std::uint32_t version = get_u32(bytes, offset + 4);
    if (version != kGridFormatVersion) {
        throw Error(ErrorCode::kBadVersion, source + ": unsupported version " + std::to_string(version));
    }
    Decoded d;
    d.shape.height = get_u32(bytes, offset + 8);
    d.shape.width = get_u32(bytes, offset + 12);
    if (d.shape.height == 0 || d.shape.width == 0) {
        throw Error(ErrorCode::kShapeMismatch, source + ": zero dimension");
    }
    const std::size_t count = d.shape.size();
    const std::size_t payload = offset + kHeaderBytes;
    if (bytes.size() < payload || (bytes.size() - payload) / 4 < count) {
        throw Error(ErrorCode::kTruncated, source + ": payload holds fewer than " + std::to_string(count) + " floats");
    }
    d.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        d.values[i] = std::bit_cast<float>(get_u32(bytes, payload + 4 * i));
        if (!std::isfinite(d.values[i])) {
            throw Error(ErrorCode::kNonFinite, source + ": non-finite value at index " + std::to_string(i));
        }
    }
    offset = payload + 4 * count;
    return d;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kMissingFile, path.string() + ": cannot open");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, path.string() + ": write failed");
}

}  // namespace

Grid::Grid(std::size_t height, std::size_t width, float fill)
    : shape_{height, width}, pixels_(height * width, fill) {
    require(height >= 1 && width >= 1, ErrorCode::kShapeMismatch, "grid dimensions must be positive");
    require(std::isfinite(fill), ErrorCode::kNonFinite, "grid fill value is not finite");
}

Grid::Grid(std::size_t height, std::size_t width, std::vector<float> pixels)
    : shape_{height, width}, pixels_(std::move(pixels)) {
    require(height >= 1 && width >= 1, ErrorCode::kShapeMismatch, "grid dimensions must be positive");
    require(pixels_.size() == height * width, ErrorCode::kShapeMismatch,
            "grid pixel count " + std::to_string(pixels_.size()) + " != " + std::to_string(height) + "x" +
                std::to_string(width));
    for (float v : pixels_) require(std::isfinite(v), ErrorCode::kNonFinite, "grid pixel is not finite");
}

float Grid::min_value() const { return *std::min_element(pixels_.begin(), pixels_.end()); }
float Grid::max_value() const { return *std::max_element(pixels_.begin(), pixels_.end()); }

BinaryMask::BinaryMask(std::size_t height, std::size_t width, bool fill)
    : shape_{height, width}, values_(height * width, fill ? 1 : 0) {
    require(height >= 1 && width >= 1, ErrorCode::kShapeMismatch, "mask dimensions must be positive");
}

BinaryMask::BinaryMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> values)
    : shape_{height, width}, values_(std::move(values)) {
    require(height >= 1 && width >= 1, ErrorCode::kShapeMismatch, "mask dimensions must be positive");
    require(values_.size() == height * width, ErrorCode::kShapeMismatch, "mask value count does not match shape");
    for (auto v : values_) require(v <= 1, ErrorCode::kInvalidMask, "mask values must be 0 or 1");
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

BinaryMask nonzero_mask(const Grid& grid) {
    BinaryMask mask(grid.height(), grid.width());
    for (std::size_t i = 0; i < grid.size(); ++i) mask.set(i, grid[i] > 0.0f);
    return mask;
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
    if (a != b) {
        throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": shape " + std::to_string(a.height) + "x" +
                                                   std::to_string(a.width) + " vs " + std::to_string(b.height) +
                                                   "x" + std::to_string(b.width));
    }
}

std::vector<std::uint8_t> encode_grid(const Grid& grid) { return encode(kGridMagic, grid.shape(), grid.pixels()); }

std::vector<std::uint8_t> encode_mask(const BinaryMask& mask) {
    std::vector<float> values(mask.values().begin(), mask.values().end());
    return encode(kMaskMagic, mask.shape(), values);
}

Grid decode_grid(std::span<const std::uint8_t> bytes, std::size_t& offset, const std::string& source) {
    Decoded d = decode(bytes, offset, kGridMagic, source);
    return Grid(d.shape.height, d.shape.width, std::move(d.values));
}

Grid read_grid(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    std::size_t offset = 0;
    return decode_grid(bytes, offset, path.string());
}

void write_grid(const Grid& grid, const std::filesystem::path& path) { dump(encode_grid(grid), path); }

BinaryMask read_mask(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    std::size_t offset = 0;
    Decoded d = decode(bytes, offset, kMaskMagic, path.string());
    std::vector<std::uint8_t> values(d.values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (d.values[i] != 0.0f && d.values[i] != 1.0f) {
            throw Error(ErrorCode::kInvalidMask, path.string() + ": mask value not in {0,1} at index " +
                                                     std::to_string(i));
        }
        values[i] = d.values[i] == 1.0f ? 1 : 0;
    }
    return BinaryMask(d.shape.height, d.shape.width, std::move(values));
}

void write_mask(const BinaryMask& mask, const std::filesystem::path& path) { dump(encode_mask(mask), path); }

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kMissingFile: return "missing-file";
        case ErrorCode::kBadMagic: return "bad-magic";
        case ErrorCode::kBadVersion: return "bad-version";
        case ErrorCode::kTruncated: return "truncated";
        case ErrorCode::kNonFinite: return "non-finite";
        case ErrorCode::kInvalidMask: return "invalid-mask";
        case ErrorCode::kIo: return "io";
        case ErrorCode::kShapeMismatch: return "shape-mismatch";
        case ErrorCode::kEmptyMask: return "empty-mask";
        case ErrorCode::kInvalidArgument: return "invalid-argument";
        case ErrorCode::kNoAdmissibleCenter: return "no-admissible-center";
        case ErrorCode::kOutOfBounds: return "out-of-bounds";
        case ErrorCode::kNoPositives: return "no-positives";
        case ErrorCode::kMissingReconstruction: return "missing-reconstruction";
        case ErrorCode::kGridMismatch: return "grid-mismatch";
        case ErrorCode::kEmptyInput: return "empty-input";
        case ErrorCode::kConfig: return "config";
    }
    return "unknown";
}

}  // namespace reslab
