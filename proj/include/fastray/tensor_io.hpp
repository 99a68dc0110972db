// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0
//
// FBTF tensor files: "FBTF", u32 version = 1, u8 dtype (0 = f32), u8 ndim,
// u32 dims[ndim], then row-major little-endian data.

#pragma once

#include "fastray/bevops.hpp"
#include "fastray/format_error.hpp"
#include "fastray/viewtrans.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace fastray {

inline constexpr std::uint32_t kTensorFormatVersion = 1;

struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    std::size_t elementCount() const;
    bool operator==(const Tensor &) const = default;
};

std::vector<std::uint8_t> serializeTensor(const Tensor &t);
/// Throws FormatError.
Tensor deserializeTensor(std::span<const std::uint8_t> bytes);

void writeTensor(const std::filesystem::path &path, const Tensor &t);
Tensor readTensor(const std::filesystem::path &path);

// Shape conventions: features [N, C, H, W]; volume [X, Y, Z, C]; BEV [X, Y, C];
// depth weights [N, D, H, W]; fusion matrix [out, in], bias [out].
Tensor toTensor(const FeatureStack &f);
Tensor toTensor(const VoxelVolume &v);
Tensor toTensor(const BevFeature &b);
FeatureStack featuresFromTensor(Tensor t);
BevFeature bevFromTensor(Tensor t);
/// Volume on `grid`; the tensor's X, Y, Z must match the grid's cell counts.
VoxelVolume volumeFromTensor(Tensor t, const VoxelGridSpec &grid);
FusionWeights fusionWeightsFromTensors(const Tensor &matrix, const Tensor *bias = nullptr);

} // namespace fastray
