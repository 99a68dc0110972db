// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/tensor_io.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace fastray;
using fastray::test::Rng;

namespace {

Tensor goldenTensor() { return {{2, 3}, {0.0f, 1.5f, -2.0f, 0.25f, 3.75f, -0.125f}}; }

FormatErrc errcOf(std::span<const std::uint8_t> bytes) {
    try {
        deserializeTensor(bytes);
    } catch (const FormatError &e) {
        return e.code();
    }
    ADD_FAILURE() << "no FormatError";
    return FormatErrc::io;
}

} // namespace

TEST(TensorIo, GoldenFileBytes) {
    const auto bytes = detail::readFileBytes(test::goldenTensorPath());
    EXPECT_EQ(bytes.size(), 4u + 4u + 1u + 1u + 2u * 4u + 6u * 4u);
    EXPECT_EQ(serializeTensor(goldenTensor()), bytes);
    EXPECT_EQ(readTensor(test::goldenTensorPath()), goldenTensor());
}

TEST(TensorIo, HeaderLayout) {
    const auto bytes = serializeTensor(goldenTensor());
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FBTF");
    EXPECT_EQ(detail::getU32(bytes, 4), kTensorFormatVersion);
    EXPECT_EQ(bytes[8], 0);
    EXPECT_EQ(bytes[9], 2);
    EXPECT_EQ(detail::getU32(bytes, 10), 2u);
    EXPECT_EQ(detail::getU32(bytes, 14), 3u);
    EXPECT_EQ(detail::getF32(bytes, 18 + 4), 1.5f);
}

TEST(TensorIo, RoundTripRandomShapes) {
    Rng rng(1);
    for (int n = 0; n < 20; ++n) {
        Tensor t;
        const int rank = test::uniformInt(rng, 1, 4);
        std::size_t count = 1;
        for (int d = 0; d < rank; ++d) {
            t.dims.push_back(static_cast<std::uint32_t>(test::uniformInt(rng, 1, 6)));
            count *= t.dims.back();
        }
        for (std::size_t i = 0; i < count; ++i) {
            t.data.push_back(static_cast<float>(test::uniform(rng, -1e6, 1e6)));
        }
        EXPECT_EQ(deserializeTensor(serializeTensor(t)), t);
    }
}

TEST(TensorIo, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "fastray_tensor_roundtrip.fbtf";
    writeTensor(path, goldenTensor());
    EXPECT_EQ(readTensor(path), goldenTensor());
    std::filesystem::remove(path);
}

TEST(TensorIo, DistinctErrors) {
    const auto good = serializeTensor(goldenTensor());
    auto bad = good;
    bad[0] = 'X';
    EXPECT_EQ(errcOf(bad), FormatErrc::bad_magic);
    bad = good;
    bad[4] = 2;
    EXPECT_EQ(errcOf(bad), FormatErrc::version_mismatch);
    bad = good;
    bad[8] = 1;
    EXPECT_EQ(errcOf(bad), FormatErrc::unsupported_dtype);
    EXPECT_EQ(errcOf(std::span(good).first(9)), FormatErrc::truncated);
    EXPECT_EQ(errcOf(std::span(good).first(14)), FormatErrc::truncated);
    EXPECT_EQ(errcOf(std::span(good).first(good.size() - 1)), FormatErrc::truncated);
    bad = good;
    bad.push_back(0);
    EXPECT_EQ(errcOf(bad), FormatErrc::shape_mismatch);
    EXPECT_THROW(serializeTensor(Tensor{{2, 2}, {1.0f}}), FormatError);
}

TEST(TensorIo, MissingFileIsIoError) {
    try {
        readTensor("/nonexistent/dir/none.fbtf");
        FAIL() << "expected FormatError";
    } catch (const FormatError &e) {
        EXPECT_EQ(e.code(), FormatErrc::io);
    }
}

TEST(TensorIo, ShapeConversions) {
    Rng rng(2);
    const FeatureStack f = test::randomFeatures(rng, 2, 3, 4, 5);
    const Tensor tf = toTensor(f);
    EXPECT_EQ(tf.dims, (std::vector<std::uint32_t>{2, 3, 4, 5}));
    EXPECT_EQ(featuresFromTensor(tf).data, f.data);

    const BevFeature b = test::randomBev(rng, 3, 2, 4);
    EXPECT_EQ(bevFromTensor(toTensor(b)), b);
    EXPECT_THROW(bevFromTensor(tf), FormatError);

    VoxelVolume v(VoxelGridSpec::withCells(2, 3, 4), 2);
    v.data[5] = 1.0f;
    const Tensor tv = toTensor(v);
    EXPECT_EQ(tv.dims, (std::vector<std::uint32_t>{2, 3, 4, 2}));
    EXPECT_EQ(volumeFromTensor(tv, v.grid).data, v.data);
    EXPECT_THROW(volumeFromTensor(tv, VoxelGridSpec::withCells(2, 3, 5)), FormatError);
}

TEST(TensorIo, FusionWeights) {
    const Tensor m{{2, 3}, {1, 2, 3, 4, 5, 6}};
    const Tensor bias{{2}, {0.5f, -0.5f}};
    const FusionWeights w = fusionWeightsFromTensors(m, &bias);
    EXPECT_EQ(w.out_channels, 2);
    EXPECT_EQ(w.in_channels, 3);
    ASSERT_TRUE(w.bias.has_value());
    EXPECT_EQ((*w.bias)[1], -0.5f);
    const Tensor short_bias{{1}, {0.0f}};
    EXPECT_THROW(fusionWeightsFromTensors(m, &short_bias), FormatError);
}
