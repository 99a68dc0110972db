// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0
//
// Multi-frame BEV fusion: warp history BEV maps into the current ego frame
// and stack them after the current map along channels.

#pragma once

#include "fastray/bevops.hpp"
#include "fastray/geometry.hpp"

#include <span>

namespace fastray {

inline constexpr int kDefaultHistoryFrames = 3;
inline constexpr double kDefaultFrameInterval = 0.5; // seconds

struct FrameSample {
    double timestamp = 0.0;
    RigidTransform world_from_ego;
    BevFeature bev;
};

/// Inverse warp of a history BEV map into the current ego frame. Each current
/// cell center (z = 0) is mapped through world_from_ego_hist^-1 *
/// world_from_ego_cur and sampled from the history map; samples falling
/// outside it read as zero. `grid` gives the metric XY frame of both maps.
BevFeature alignToCurrent(const FrameSample &hist, const RigidTransform &cur_pose, const VoxelGridSpec &grid,
                          Interpolation mode = Interpolation::bilinear);

/// [current, align(history[0]), align(history[1]), ...] along channels.
/// History is expected most recent first.
BevFeature fuseFrames(const BevFeature &current, std::span<const FrameSample> history,
                      const RigidTransform &cur_pose, const VoxelGridSpec &grid,
                      Interpolation mode = Interpolation::bilinear);

} // namespace fastray
