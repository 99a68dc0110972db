// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0
//
// The voxel -> (camera, pixel) lookup table. It depends only on calibration
// and the voxel grid, so it is built once and reused for every frame.

#pragma once

#include "fastray/format_error.hpp"
#include "fastray/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace fastray {

struct LutEntry {
    std::int32_t cam = -1;
    std::int32_t u = -1;
    std::int32_t v = -1;

    static constexpr LutEntry sentinel() { return {}; }
    constexpr bool isSentinel() const { return cam < 0; }
    bool operator==(const LutEntry &) const = default;
};

class LookupTable {
  public:
    /// Validates entry count and per-entry bounds: sentinel entries must be
    /// exactly (-1,-1,-1), others need cam < n_cameras and u, v >= 0.
    LookupTable(VoxelGridSpec grid, std::int32_t n_cameras, std::vector<LutEntry> entries);

    const VoxelGridSpec &grid() const { return grid_; }
    std::int32_t cameraCount() const { return n_cameras_; }
    std::span<const LutEntry> entries() const { return entries_; }
    const LutEntry &operator[](std::size_t offset) const { return entries_[offset]; }
    std::size_t size() const { return entries_.size(); }

    /// Largest u / v over mapped entries, -1 if nothing is mapped. Lets a
    /// consumer check image bounds once instead of per voxel.
    std::int32_t maxU() const { return max_u_; }
    std::int32_t maxV() const { return max_v_; }

    /// Mapped voxel offsets sorted by (cam, v, u, offset). Walking the table in
    /// this order reads each camera's pixels sequentially and visits voxels
    /// that share a pixel back to back.
    std::span<const std::uint32_t> gatherOrder() const { return gather_order_; }
    std::span<const std::uint32_t> unmappedOffsets() const { return unmapped_; }

    /// Fraction of voxels mapped to `cam`, or to any camera when cam < 0.
    double fillFraction(std::int32_t cam = -1) const;

    bool operator==(const LookupTable &other) const {
        return grid_.nx() == other.grid_.nx() && grid_.ny() == other.grid_.ny() &&
               grid_.nz() == other.grid_.nz() && n_cameras_ == other.n_cameras_ &&
               entries_ == other.entries_;
    }

  private:
    VoxelGridSpec grid_;
    std::int32_t n_cameras_;
    std::vector<LutEntry> entries_;
    std::int32_t max_u_ = -1;
    std::int32_t max_v_ = -1;
    std::vector<std::uint32_t> gather_order_;
    std::vector<std::uint32_t> unmapped_;
};

struct PixelIndex {
    std::int32_t u;
    std::int32_t v;
};

/// (floor(u), floor(v)) when `p_ego` projects strictly in front of `cam` and
/// inside its image; nullopt otherwise.
std::optional<PixelIndex> visiblePixel(const Camera &cam, const Vec3 &p_ego);

/// First camera in rig order with a visible pixel for `p_ego`, else sentinel.
LutEntry firstVisibleView(const CameraRig &rig, const Vec3 &p_ego);

/// One entry per voxel: the first camera (in rig order) that sees the voxel
/// center strictly in front of it and inside the image, as
/// (cam, floor(u), floor(v)). Output does not depend on `threads`.
LookupTable buildLut(const CameraRig &rig, const VoxelGridSpec &grid, int threads = 1);

/// Table for a history frame: current-frame voxel centers projected into the
/// history frame's cameras. `ego_cur_from_ego_hist` maps history-ego
/// coordinates to current-ego coordinates.
LookupTable buildHistoryLut(const CameraRig &rig, const VoxelGridSpec &grid,
                            const RigidTransform &ego_cur_from_ego_hist, int threads = 1);

/// Rig whose extrinsics see current-ego points through the history cameras.
CameraRig historyAlignedRig(const CameraRig &rig, const RigidTransform &ego_cur_from_ego_hist);

// FBLT binary: "FBLT", u32 version, u32 nx, ny, nz, u32 n_cameras, 8 zero
// bytes, then (i32 cam, i32 u, i32 v) per voxel in offset order. Little-endian.
inline constexpr std::uint32_t kLutFormatVersion = 1;
inline constexpr std::size_t kLutHeaderBytes = 32;
inline constexpr std::size_t kLutRecordBytes = 12;

std::vector<std::uint8_t> serializeLut(const LookupTable &lut);

/// The grid's metric range is not stored; `grid_range` supplies it (its cell
/// counts are replaced by the file's). Throws FormatError.
LookupTable deserializeLut(std::span<const std::uint8_t> bytes,
                           const VoxelGridSpec &grid_range = VoxelGridSpec{});

void writeLut(const std::filesystem::path &path, const LookupTable &lut);
LookupTable readLut(const std::filesystem::path &path, const VoxelGridSpec &grid_range = VoxelGridSpec{});

} // namespace fastray
