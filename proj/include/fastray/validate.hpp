// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0
//
// Self-check suite run by `fastray validate`: cross-checks the table and the
// transforms against independent brute-force paths for one rig and grid.

#pragma once

#include "fastray/geometry.hpp"
#include "fastray/lut.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fastray {

struct PropertyResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Table computed with 3x4 homogeneous projection matrices, one voxel at a
/// time, without the geometry helpers buildLut uses.
std::vector<LutEntry> exhaustiveLutOracle(const CameraRig &rig, const VoxelGridSpec &grid);

std::vector<PropertyResult> runValidation(const CameraRig &rig, const VoxelGridSpec &grid, std::uint64_t seed,
                                          int channels = 8);

} // namespace fastray
