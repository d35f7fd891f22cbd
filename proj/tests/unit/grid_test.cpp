#include "reslab/errors.hpp"
#include "reslab/grid.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace reslab {
namespace {

using testing::TempDir;

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no reslab::Error thrown";
    return ErrorCode::kIo;
}

TEST(GridTest, ConstructorValidatesShapeAndFiniteness) {
    EXPECT_EQ(code_of([] { Grid(2, 2, std::vector<float>{1, 2, 3}); }), ErrorCode::kShapeMismatch);
    EXPECT_EQ(code_of([] { Grid(1, 2, std::vector<float>{0.f, std::nanf("")}); }), ErrorCode::kNonFinite);
    EXPECT_EQ(code_of([] {
                  Grid(1, 1, std::vector<float>{std::numeric_limits<float>::infinity()});
              }),
              ErrorCode::kNonFinite);
    const Grid g(2, 3, std::vector<float>{0, 1, 2, 3, 4, 5});
    EXPECT_EQ(g(1, 2), 5.0f);
    EXPECT_EQ(g.min_value(), 0.0f);
    EXPECT_EQ(g.max_value(), 5.0f);
}

TEST(GridTest, MaskRejectsValuesOtherThanZeroOrOne) {
    EXPECT_EQ(code_of([] { BinaryMask(1, 2, std::vector<std::uint8_t>{0, 2}); }), ErrorCode::kInvalidMask);
    const BinaryMask m(1, 3, std::vector<std::uint8_t>{1, 0, 1});
    EXPECT_EQ(m.count(), 2u);
}

TEST(GridTest, NonzeroMaskMarksPositivePixels) {
    const Grid g(1, 4, std::vector<float>{0.0f, 0.2f, 0.0f, 1.0f});
    const BinaryMask m = nonzero_mask(g);
    EXPECT_FALSE(m[0]);
    EXPECT_TRUE(m[1]);
    EXPECT_FALSE(m[2]);
    EXPECT_TRUE(m[3]);
}

// Header layout: magic, u32 version, u32 height, u32 width, all little endian.
TEST(GridFileTest, SinglePixelFileHasHeaderPlusOneFloat) {
    TempDir dir;
    write_grid(Grid(1, 1, std::vector<float>{0.5f}), dir / "one.f32g");
    const auto bytes = read_bytes(dir / "one.f32g");
    ASSERT_EQ(bytes.size(), 20u);
    EXPECT_EQ(std::memcmp(bytes.data(), "F32G", 4), 0);
    const std::vector<std::uint8_t> version_h_w = {1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0};
    EXPECT_TRUE(std::equal(version_h_w.begin(), version_h_w.end(), bytes.begin() + 4));
    // 0.5f = 0x3F000000
    const std::vector<std::uint8_t> half = {0x00, 0x00, 0x00, 0x3F};
    EXPECT_TRUE(std::equal(half.begin(), half.end(), bytes.begin() + 16));
}

TEST(GridFileTest, RoundTripIsExactAndWritesAreIdempotent) {
    TempDir dir;
    const Grid g = testing::random_grid(7, 5, 42);
    write_grid(g, dir / "a.f32g");
    write_grid(g, dir / "b.f32g");
    EXPECT_EQ(read_grid(dir / "a.f32g"), g);
    EXPECT_EQ(read_bytes(dir / "a.f32g"), read_bytes(dir / "b.f32g"));
    EXPECT_EQ(read_bytes(dir / "a.f32g"), encode_grid(g));
}

TEST(GridFileTest, MaskRoundTrip) {
    TempDir dir;
    BinaryMask m(3, 4);
    m.set(0, 1, true);
    m.set(2, 3, true);
    write_mask(m, dir / "m.maskg");
    const auto bytes = read_bytes(dir / "m.maskg");
    EXPECT_EQ(std::memcmp(bytes.data(), "MSKG", 4), 0);
    EXPECT_EQ(read_mask(dir / "m.maskg"), m);
}

TEST(GridFileTest, DistinctErrorsForEachCorruption) {
    TempDir dir;
    const auto good = encode_grid(testing::random_grid(2, 2, 1));

    EXPECT_EQ(code_of([&] { read_grid(dir / "missing.f32g"); }), ErrorCode::kMissingFile);

    auto bad_magic = good;
    bad_magic[0] = 'X';
    write_bytes(dir / "magic.f32g", bad_magic);
    EXPECT_EQ(code_of([&] { read_grid(dir / "magic.f32g"); }), ErrorCode::kBadMagic);

    auto bad_version = good;
    bad_version[4] = 2;
    write_bytes(dir / "version.f32g", bad_version);
    EXPECT_EQ(code_of([&] { read_grid(dir / "version.f32g"); }), ErrorCode::kBadVersion);

    auto truncated = good;
    truncated.pop_back();
    write_bytes(dir / "short.f32g", truncated);
    EXPECT_EQ(code_of([&] { read_grid(dir / "short.f32g"); }), ErrorCode::kTruncated);

    auto header_only = std::vector<std::uint8_t>(good.begin(), good.begin() + 10);
    write_bytes(dir / "header.f32g", header_only);
    EXPECT_EQ(code_of([&] { read_grid(dir / "header.f32g"); }), ErrorCode::kTruncated);

    auto nan = good;
    const float q = std::nanf("");
    std::memcpy(nan.data() + 16, &q, 4);
    write_bytes(dir / "nan.f32g", nan);
    EXPECT_EQ(code_of([&] { read_grid(dir / "nan.f32g"); }), ErrorCode::kNonFinite);

    // A grid file is not a mask file.
    write_bytes(dir / "grid_as_mask.maskg", good);
    EXPECT_EQ(code_of([&] { read_mask(dir / "grid_as_mask.maskg"); }), ErrorCode::kBadMagic);

    auto mask = encode_mask(BinaryMask(1, 2));
    mask.back() = 3;
    write_bytes(dir / "bad.maskg", mask);
    EXPECT_EQ(code_of([&] { read_mask(dir / "bad.maskg"); }), ErrorCode::kInvalidMask);
}

TEST(GridFileTest, DecodeAdvancesThroughConcatenatedRecords) {
    const Grid a = testing::random_grid(2, 3, 7), b = testing::random_grid(4, 1, 8);
    auto bytes = encode_grid(a);
    const auto tail = encode_grid(b);
    bytes.insert(bytes.end(), tail.begin(), tail.end());
    std::size_t offset = 0;
    EXPECT_EQ(decode_grid(bytes, offset, "buf"), a);
    EXPECT_EQ(decode_grid(bytes, offset, "buf"), b);
    EXPECT_EQ(offset, bytes.size());
}

}  // namespace
}  // namespace reslab
