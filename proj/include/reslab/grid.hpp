#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace reslab {

struct Shape {
    std::size_t height = 0;
    std::size_t width = 0;

    std::size_t size() const { return height * width; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Row-major float image, nominally in [0, 1]. Used for inputs, reconstructions
/// and anomaly maps alike.
class Grid {
public:
    Grid() = default;
    Grid(std::size_t height, std::size_t width, float fill = 0.0f);
    /// Throws kShapeMismatch if the pixel count is wrong and kNonFinite on NaN/inf.
    Grid(std::size_t height, std::size_t width, std::vector<float> pixels);

    std::size_t height() const { return shape_.height; }
    std::size_t width() const { return shape_.width; }
    std::size_t size() const { return pixels_.size(); }
    const Shape& shape() const { return shape_; }

    float operator()(std::size_t row, std::size_t col) const { return pixels_[row * shape_.width + col]; }
    float& operator()(std::size_t row, std::size_t col) { return pixels_[row * shape_.width + col]; }
    float operator[](std::size_t index) const { return pixels_[index]; }
    float& operator[](std::size_t index) { return pixels_[index]; }

    std::span<const float> pixels() const { return pixels_; }
    std::span<float> pixels() { return pixels_; }

    float min_value() const;
    float max_value() const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    Shape shape_;
    std::vector<float> pixels_;
};

/// Per-pixel {0,1} labels: object masks, anomaly regions, evaluation regions.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(std::size_t height, std::size_t width, bool fill = false);
    /// Values other than 0/1 raise kInvalidMask.
    BinaryMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> values);

    std::size_t height() const { return shape_.height; }
    std::size_t width() const { return shape_.width; }
    std::size_t size() const { return values_.size(); }
    const Shape& shape() const { return shape_; }

    bool operator()(std::size_t row, std::size_t col) const { return values_[row * shape_.width + col] != 0; }
    bool operator[](std::size_t index) const { return values_[index] != 0; }
    void set(std::size_t row, std::size_t col, bool on) { values_[row * shape_.width + col] = on ? 1 : 0; }
    void set(std::size_t index, bool on) { values_[index] = on ? 1 : 0; }

    std::span<const std::uint8_t> values() const { return values_; }
    std::size_t count() const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    Shape shape_;
    std::vector<std::uint8_t> values_;
};

/// Mask of strictly positive pixels.
BinaryMask nonzero_mask(const Grid& grid);

void require_same_shape(const Shape& a, const Shape& b, const char* what);

// ---- .f32g / .maskg files ---------------------------------------------------

inline constexpr std::uint32_t kGridFormatVersion = 1;

Grid read_grid(const std::filesystem::path& path);
void write_grid(const Grid& grid, const std::filesystem::path& path);

BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// Serialized record bytes; the file writers emit exactly these.
std::vector<std::uint8_t> encode_grid(const Grid& grid);
std::vector<std::uint8_t> encode_mask(const BinaryMask& mask);

/// Decodes one record starting at `offset` and advances it past the payload.
Grid decode_grid(std::span<const std::uint8_t> bytes, std::size_t& offset, const std::string& source);

}  // namespace reslab
