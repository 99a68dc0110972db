// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0
//
// BEV-plane tensor operators: space-to-channel, XY upsampling, channel concat
// and the per-pixel affine channel fusion used for multi-scale and
// multi-frame features.

#pragma once

#include "fastray/viewtrans.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fastray {

/// BEV features, layout [i][j][channel].
struct BevFeature {
    std::int64_t nx = 0;
    std::int64_t ny = 0;
    std::int64_t channels = 0;
    std::vector<float> data;

    BevFeature() = default;
    BevFeature(std::int64_t x, std::int64_t y, std::int64_t c);

    void validate() const;

    std::size_t index(std::int64_t i, std::int64_t j, std::int64_t c) const {
        return static_cast<std::size_t>((i * ny + j) * channels + c);
    }
    float &at(std::int64_t i, std::int64_t j, std::int64_t c) { return data[index(i, j, c)]; }
    float at(std::int64_t i, std::int64_t j, std::int64_t c) const { return data[index(i, j, c)]; }

    bool operator==(const BevFeature &) const = default;
};

/// X x Y x Z x C -> X x Y x (Z*C), channel index k*C + c. Because voxels are
/// stored z-innermost this is the same memory; the rvalue overload moves it.
BevFeature spaceToChannel(const VoxelVolume &volume);
BevFeature spaceToChannel(VoxelVolume &&volume);

/// Inverse of spaceToChannel for a volume on `grid` with `channels` per voxel.
VoxelVolume channelToSpace(const BevFeature &bev, const VoxelGridSpec &grid, std::int64_t channels);

enum class Interpolation { nearest, bilinear };

/// Resizes XY to (nx, ny) with half-pixel (align_corners = false) sampling.
/// Throws std::invalid_argument if the target is smaller than the source.
BevFeature upsampleBev(const BevFeature &bev, std::int64_t nx, std::int64_t ny,
                       Interpolation mode = Interpolation::bilinear);

/// Stacks channels in input order. Throws on an empty list or XY mismatch.
BevFeature concatChannels(std::span<const BevFeature> features);

/// Channels [first, first + count) of `bev`.
BevFeature sliceChannels(const BevFeature &bev, std::int64_t first, std::int64_t count);

/// out x in matrix (row-major) plus optional bias.
struct FusionWeights {
    std::int64_t in_channels = 0;
    std::int64_t out_channels = 0;
    std::vector<float> matrix;
    std::optional<std::vector<float>> bias;

    void validate() const;
    static FusionWeights identity(std::int64_t channels);
    /// Entries uniform in [-scale, scale] from a seeded generator.
    static FusionWeights random(std::int64_t in, std::int64_t out, std::uint64_t seed, float scale = 0.1f,
                                bool with_bias = false);
};

/// Per-pixel out = W * in (+ bias). Throws on channel mismatch.
BevFeature fuseChannels(const BevFeature &bev, const FusionWeights &weights, int threads = 1);

} // namespace fastray
