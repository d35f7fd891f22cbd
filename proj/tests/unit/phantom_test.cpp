#include "reslab/errors.hpp"
#include "reslab/phantom.hpp"

#include <gtest/gtest.h>

namespace reslab {
namespace {

TEST(PhantomTest, PureFunctionOfSeedAndSize) {
    const Phantom a = make_phantom(11, 96, 96);
    const Phantom b = make_phantom(11, 96, 96);
    const Phantom c = make_phantom(12, 96, 96);
    EXPECT_EQ(a.image, b.image);
    EXPECT_EQ(a.mask, b.mask);
    EXPECT_NE(a.image, c.image);
}

TEST(PhantomTest, BackgroundIsZeroAndObjectInRange) {
    const Phantom p = make_phantom(3, 128, 128);
    std::size_t object = 0;
    for (std::size_t i = 0; i < p.image.size(); ++i) {
        if (p.mask[i]) {
            ++object;
            EXPECT_GT(p.image[i], 0.0f);
            EXPECT_LE(p.image[i], 0.98f);
        } else {
            EXPECT_EQ(p.image[i], 0.0f);
        }
    }
    // Corners lie outside the head.
    EXPECT_FALSE(p.mask(0, 0));
    EXPECT_FALSE(p.mask(127, 127));
    EXPECT_GT(object, 128u * 128u / 3);
}

// Object-mean target: 0.446 on real brain slices, accepted within +-0.05.
TEST(PhantomTest, MeanObjectIntensityNearBrainSlices) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Phantom p = make_phantom(seed, 128, 128);
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < p.image.size(); ++i) {
            if (p.mask[i]) {
                sum += p.image[i];
                ++n;
            }
        }
        total += sum / n;
    }
    EXPECT_NEAR(total / 100.0, 0.446, 0.05);
}

TEST(PhantomTest, SetStemsAndSizeCheck) {
    const Dataset d = make_phantom_set(0, DatasetRole::kTrain, 3, 64);
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d[0].stem.rfind("phantom_train_", 0), 0u);
    EXPECT_NE(d[0].stem, d[1].stem);
    EXPECT_NE(d[0].image, d[1].image);
    ASSERT_TRUE(d[2].mask);
    const Dataset again = make_phantom_set(0, DatasetRole::kTrain, 3, 64);
    EXPECT_EQ(again[2].image, d[2].image);
    const Dataset test = make_phantom_set(0, DatasetRole::kTest, 1, 64);
    EXPECT_NE(test[0].image, d[0].image);

    EXPECT_THROW(make_phantom(0, 32, 32), Error);
}

}  // namespace
}  // namespace reslab
