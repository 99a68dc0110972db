// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/bevops.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace fastray;
using fastray::test::Rng;

namespace {

VoxelVolume randomVolume(Rng &rng, std::int64_t nx, std::int64_t ny, std::int64_t nz, std::int64_t c) {
    VoxelVolume v(VoxelGridSpec::withCells(nx, ny, nz), c);
    for (auto &x : v.data) {
        x = static_cast<float>(test::uniform(rng, -1, 1));
    }
    return v;
}

// align_corners=false source coordinate, clamped to the valid sample range.
double sourceCoord(std::int64_t dst, std::int64_t in, std::int64_t out) {
    const double s = (static_cast<double>(dst) + 0.5) * static_cast<double>(in) / static_cast<double>(out) - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(in - 1));
}

} // namespace

TEST(SpaceToChannel, DegenerateVolume) {
    VoxelVolume v(VoxelGridSpec::withCells(1, 1, 1), 2);
    v.data = {1.25f, -3.0f};
    const BevFeature b = spaceToChannel(v);
    EXPECT_EQ(b.nx, 1);
    EXPECT_EQ(b.ny, 1);
    EXPECT_EQ(b.channels, 2);
    EXPECT_EQ(b.data, (std::vector<float>{1.25f, -3.0f}));
}

TEST(SpaceToChannel, ZMajorChannelOrder) {
    Rng rng(1);
    const VoxelVolume v = randomVolume(rng, 3, 4, 5, 2);
    const BevFeature b = spaceToChannel(v);
    ASSERT_EQ(b.channels, 10);
    for (std::int64_t i = 0; i < 3; ++i) {
        for (std::int64_t j = 0; j < 4; ++j) {
            for (std::int64_t k = 0; k < 5; ++k) {
                for (std::int64_t c = 0; c < 2; ++c) {
                    EXPECT_EQ(b.at(i, j, k * 2 + c), v.at(i, j, k, c));
                }
            }
        }
    }
}

TEST(SpaceToChannel, DefaultGridShape) {
    const VoxelVolume v(VoxelGridSpec{}, 3);
    const BevFeature b = spaceToChannel(v);
    EXPECT_EQ(b.nx, 200);
    EXPECT_EQ(b.ny, 200);
    EXPECT_EQ(b.channels, 18);
}

TEST(SpaceToChannel, InverseIsExact) {
    Rng rng(2);
    const VoxelVolume v = randomVolume(rng, 7, 5, 3, 4);
    const VoxelVolume back = channelToSpace(spaceToChannel(v), v.grid, v.channels);
    EXPECT_EQ(back.data, v.data);
    EXPECT_EQ(back.grid, v.grid);
}

TEST(SpaceToChannel, MoveReusesStorage) {
    Rng rng(3);
    VoxelVolume v = randomVolume(rng, 6, 6, 2, 3);
    const float *storage = v.data.data();
    const BevFeature b = spaceToChannel(std::move(v));
    EXPECT_EQ(b.data.data(), storage);
}

TEST(SpaceToChannel, InverseRejectsBadChannelSplit) {
    const BevFeature b(2, 2, 6);
    EXPECT_THROW(channelToSpace(b, VoxelGridSpec::withCells(2, 2, 4), 2), std::invalid_argument);
    EXPECT_THROW(channelToSpace(b, VoxelGridSpec::withCells(3, 2, 3), 2), std::invalid_argument);
}

TEST(Upsample, NearestConstantField) {
    BevFeature b(2, 2, 3);
    std::fill(b.data.begin(), b.data.end(), 0.7f);
    const BevFeature up = upsampleBev(b, 4, 4, Interpolation::nearest);
    EXPECT_EQ(up.nx, 4);
    EXPECT_EQ(up.channels, 3);
    EXPECT_TRUE(std::all_of(up.data.begin(), up.data.end(), [](float x) { return x == 0.7f; }));
}

TEST(Upsample, BilinearConstantFieldExact) {
    BevFeature b(3, 5, 2);
    std::fill(b.data.begin(), b.data.end(), 0.3f);
    const BevFeature up = upsampleBev(b, 7, 11, Interpolation::bilinear);
    EXPECT_TRUE(std::all_of(up.data.begin(), up.data.end(), [](float x) { return x == 0.3f; }));
}

TEST(Upsample, NearestIntegerMultipleReplicates) {
    Rng rng(4);
    const BevFeature b = test::randomBev(rng, 5, 3, 2);
    const BevFeature up = upsampleBev(b, 15, 6, Interpolation::nearest);
    for (std::int64_t i = 0; i < 15; ++i) {
        for (std::int64_t j = 0; j < 6; ++j) {
            for (std::int64_t c = 0; c < 2; ++c) {
                EXPECT_EQ(up.at(i, j, c), b.at(i / 3, j / 2, c));
            }
        }
    }
}

TEST(Upsample, BilinearRampPreserved) {
    BevFeature b(10, 6, 1);
    for (std::int64_t i = 0; i < 10; ++i) {
        for (std::int64_t j = 0; j < 6; ++j) {
            b.at(i, j, 0) = static_cast<float>(i);
        }
    }
    const BevFeature up = upsampleBev(b, 20, 12);
    for (std::int64_t i = 0; i < 20; ++i) {
        for (std::int64_t j = 0; j < 12; ++j) {
            EXPECT_NEAR(up.at(i, j, 0), sourceCoord(i, 10, 20), 1e-6);
        }
    }
}

TEST(Upsample, BilinearMatchesPerCellOracle) {
    Rng rng(5);
    const BevFeature b = test::randomBev(rng, 4, 7, 3);
    const BevFeature up = upsampleBev(b, 9, 13);
    for (std::int64_t i = 0; i < 9; ++i) {
        for (std::int64_t j = 0; j < 13; ++j) {
            for (std::int64_t c = 0; c < 3; ++c) {
                const double want = test::bilinearOracle(b, sourceCoord(i, 4, 9), sourceCoord(j, 7, 13), c);
                EXPECT_NEAR(up.at(i, j, c), want, 1e-6);
            }
        }
    }
}

TEST(Upsample, HundredToTwoHundred) {
    const BevFeature up = upsampleBev(BevFeature(100, 100, 4), 200, 200);
    EXPECT_EQ(up.nx, 200);
    EXPECT_EQ(up.ny, 200);
    EXPECT_EQ(up.channels, 4);
}

TEST(Upsample, SmallerTargetThrows) {
    EXPECT_THROW(upsampleBev(BevFeature(4, 4, 1), 3, 8), std::invalid_argument);
}

TEST(Concat, SlicesRecoverInputs) {
    Rng rng(6);
    const BevFeature a = test::randomBev(rng, 3, 4, 2);
    const BevFeature b = test::randomBev(rng, 3, 4, 3);
    const BevFeature parts[] = {a, b};
    const BevFeature cat = concatChannels(parts);
    EXPECT_EQ(cat.channels, 5);
    EXPECT_EQ(sliceChannels(cat, 0, 2), a);
    EXPECT_EQ(sliceChannels(cat, 2, 3), b);
    EXPECT_THROW(sliceChannels(cat, 4, 2), std::invalid_argument);
}

TEST(Concat, FourFramesOfSixC) {
    const std::vector<BevFeature> frames(4, BevFeature(8, 8, 6 * 5));
    EXPECT_EQ(concatChannels(frames).channels, 4 * 6 * 5);
}

TEST(Concat, Errors) {
    EXPECT_THROW(concatChannels({}), std::invalid_argument);
    const BevFeature parts[] = {BevFeature(2, 2, 1), BevFeature(2, 3, 1)};
    EXPECT_THROW(concatChannels(parts), std::invalid_argument);
}

TEST(Fuse, IdentityWeights) {
    Rng rng(7);
    const BevFeature b = test::randomBev(rng, 5, 4, 6);
    EXPECT_EQ(fuseChannels(b, FusionWeights::identity(6)), b);
}

TEST(Fuse, OnesRowSums) {
    BevFeature b(3, 3, 7);
    std::fill(b.data.begin(), b.data.end(), 1.0f);
    FusionWeights w;
    w.in_channels = 7;
    w.out_channels = 1;
    w.matrix.assign(7, 1.0f);
    const BevFeature out = fuseChannels(b, w);
    EXPECT_EQ(out.channels, 1);
    EXPECT_TRUE(std::all_of(out.data.begin(), out.data.end(), [](float x) { return x == 7.0f; }));
}

TEST(Fuse, MatchesDenseMatmulOracle) {
    Rng rng(8);
    const BevFeature b = test::randomBev(rng, 6, 5, 12);
    const FusionWeights w = FusionWeights::random(12, 5, 99, 0.5f, true);
    const BevFeature out = fuseChannels(b, w, 3);
    for (std::int64_t i = 0; i < 6; ++i) {
        for (std::int64_t j = 0; j < 5; ++j) {
            for (std::int64_t o = 0; o < 5; ++o) {
                double acc = (*w.bias)[static_cast<std::size_t>(o)];
                for (std::int64_t c = 0; c < 12; ++c) {
                    acc += static_cast<double>(w.matrix[static_cast<std::size_t>(o * 12 + c)]) * b.at(i, j, c);
                }
                EXPECT_NEAR(out.at(i, j, o), acc, 1e-6);
            }
        }
    }
}

TEST(Fuse, LinearWithoutBias) {
    Rng rng(9);
    const BevFeature a = test::randomBev(rng, 4, 4, 8);
    const BevFeature b = test::randomBev(rng, 4, 4, 8);
    const FusionWeights w = FusionWeights::random(8, 3, 5);
    BevFeature mix = a;
    for (std::size_t n = 0; n < mix.data.size(); ++n) {
        mix.data[n] = 2.0f * a.data[n] - 0.5f * b.data[n];
    }
    const BevFeature fa = fuseChannels(a, w);
    const BevFeature fb = fuseChannels(b, w);
    const BevFeature fm = fuseChannels(mix, w);
    for (std::size_t n = 0; n < fm.data.size(); ++n) {
        EXPECT_NEAR(fm.data[n], 2.0f * fa.data[n] - 0.5f * fb.data[n], 1e-5);
    }
}

TEST(Fuse, ChannelMismatchThrows) {
    EXPECT_THROW(fuseChannels(BevFeature(2, 2, 3), FusionWeights::identity(4)), std::invalid_argument);
}

TEST(Fuse, RandomWeightsAreSeeded) {
    const auto a = FusionWeights::random(6, 4, 11);
    const auto b = FusionWeights::random(6, 4, 11);
    const auto c = FusionWeights::random(6, 4, 12);
    EXPECT_EQ(a.matrix, b.matrix);
    EXPECT_NE(a.matrix, c.matrix);
    EXPECT_TRUE(std::all_of(a.matrix.begin(), a.matrix.end(), [](float x) { return std::abs(x) <= 0.1f; }));
}
