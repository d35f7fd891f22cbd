#pragma once

#include "reslab/grid.hpp"
#include "reslab/rng.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

namespace reslab::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        std::string name = "reslab_" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
        if (info) name += std::string("_") + info->name();
        path_ = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

inline Grid random_grid(std::size_t h, std::size_t w, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Grid g(h, w);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<float>(rng.uniform01());
    return g;
}

}  // namespace reslab::testing
