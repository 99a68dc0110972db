// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0
//
// Camera-feature to voxel-volume transforms:
//   fastRayTransform       LUT gather into one dense volume
//   naiveTransform         per-camera sparse volumes + aggregation, no LUT
//   lssReferenceTransform  depth-distribution splat with sum pooling

#pragma once

#include "fastray/geometry.hpp"
#include "fastray/lut.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fastray {

/// Multi-camera image features, layout [cam][channel][v][u].
struct FeatureStack {
    std::int64_t n_cameras = 0;
    std::int64_t channels = 0;
    std::int64_t height = 0;
    std::int64_t width = 0;
    std::vector<float> data;

    FeatureStack() = default;
    FeatureStack(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w);

    /// Throws std::invalid_argument on empty dims or a size mismatch.
    void validate() const;

    std::size_t index(std::int64_t cam, std::int64_t c, std::int64_t v, std::int64_t u) const {
        return static_cast<std::size_t>(((cam * channels + c) * height + v) * width + u);
    }
    float &at(std::int64_t cam, std::int64_t c, std::int64_t v, std::int64_t u) { return data[index(cam, c, v, u)]; }
    float at(std::int64_t cam, std::int64_t c, std::int64_t v, std::int64_t u) const { return data[index(cam, c, v, u)]; }
};

/// Dense voxel features, layout [i][j][k][channel].
struct VoxelVolume {
    VoxelGridSpec grid;
    std::int64_t channels = 0;
    std::vector<float> data;

    VoxelVolume() = default;
    VoxelVolume(const VoxelGridSpec &g, std::int64_t c);

    std::size_t index(std::int64_t i, std::int64_t j, std::int64_t k, std::int64_t c) const {
        return grid.offset(i, j, k) * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c);
    }
    float at(std::int64_t i, std::int64_t j, std::int64_t k, std::int64_t c) const { return data[index(i, j, k, c)]; }
};

/// Per-pixel weights over depth bins, layout [cam][bin][v][u]. `bin_depths`
/// holds the metric camera-frame depth of each bin center.
struct DepthDistribution {
    std::int64_t n_cameras = 0;
    std::int64_t height = 0;
    std::int64_t width = 0;
    std::vector<double> bin_depths;
    std::vector<float> weights;

    DepthDistribution() = default;
    DepthDistribution(std::int64_t n, std::vector<double> bins, std::int64_t h, std::int64_t w);

    std::int64_t bins() const { return static_cast<std::int64_t>(bin_depths.size()); }
    std::size_t index(std::int64_t cam, std::int64_t d, std::int64_t v, std::int64_t u) const {
        return static_cast<std::size_t>(((cam * bins() + d) * height + v) * width + u);
    }
    float &at(std::int64_t cam, std::int64_t d, std::int64_t v, std::int64_t u) { return weights[index(cam, d, v, u)]; }

    /// Same weight for every bin of every pixel.
    static DepthDistribution uniform(std::int64_t n, std::vector<double> bins, std::int64_t h, std::int64_t w);
};

enum class Aggregation { first_view, mean };

/// Gathers features[cam][:][v][u] for every mapped voxel; unmapped voxels are
/// zero. No projection math runs here. Throws std::invalid_argument if the
/// camera count differs or a table entry falls outside the feature maps.
VoxelVolume fastRayTransform(const FeatureStack &features, const LookupTable &lut, int threads = 1);

/// Same as fastRayTransform into a caller-owned volume of matching shape.
/// Every element of `out` is written.
void fastRayTransformInto(const FeatureStack &features, const LookupTable &lut, VoxelVolume &out,
                          int threads = 1);

/// Baseline without a table: one dense (mostly empty) volume per camera,
/// projections recomputed on every call, then a dense aggregation pass.
VoxelVolume naiveTransform(const FeatureStack &features, const CameraRig &rig, const VoxelGridSpec &grid,
                           Aggregation aggregation = Aggregation::first_view, int threads = 1);

/// Splats feature * depth weight for every (camera, pixel, bin) into the voxel
/// holding the unprojected pixel-center point; contributions are summed and
/// points outside the grid dropped. Per-camera partial volumes are reduced in
/// camera order, so the result does not depend on `threads`.
VoxelVolume lssReferenceTransform(const FeatureStack &features, const DepthDistribution &depth,
                                  const CameraRig &rig, const VoxelGridSpec &grid, int threads = 1);

inline constexpr int kDefaultPyramidStrides[] = {4, 8, 16};

/// One fast-ray volume per pyramid level. Level l uses `rig` rescaled by
/// 1/strides[l] and grids[l]. Throws std::invalid_argument on level-count
/// mismatch.
std::vector<VoxelVolume> multiScaleTransform(std::span<const FeatureStack> pyramid, std::span<const int> strides,
                                             const CameraRig &rig, std::span<const VoxelGridSpec> grids,
                                             int threads = 1);

/// Variant reusing prebuilt per-level tables.
std::vector<VoxelVolume> multiScaleTransform(std::span<const FeatureStack> pyramid,
                                             std::span<const LookupTable> luts, int threads = 1);

/// Per-level tables for multiScaleTransform.
std::vector<LookupTable> buildPyramidLuts(const CameraRig &rig, std::span<const int> strides,
                                          std::span<const VoxelGridSpec> grids, int threads = 1);

/// Grids sharing `base`'s metric range with XY cells 200/150/100.
std::vector<VoxelGridSpec> defaultPyramidGrids(const VoxelGridSpec &base);

} // namespace fastray
