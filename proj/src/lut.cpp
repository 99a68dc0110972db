// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/lut.hpp"

#include "fastray/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

namespace fastray {

LookupTable::LookupTable(VoxelGridSpec grid, std::int32_t n_cameras, std::vector<LutEntry> entries)
    : grid_(grid), n_cameras_(n_cameras), entries_(std::move(entries)) {
    grid_.validate();
    if (n_cameras_ < 1) {
        throw std::invalid_argument("lookup table needs at least one camera");
    }
    if (entries_.size() != grid_.voxelCount()) {
        std::ostringstream os;
        os << "lookup table has " << entries_.size() << " entries, grid needs " << grid_.voxelCount();
        throw std::invalid_argument(os.str());
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const LutEntry &e = entries_[i];
        if (e.isSentinel()) {
            if (e != LutEntry::sentinel()) {
                throw FormatError(FormatErrc::out_of_bounds, "malformed sentinel at offset " + std::to_string(i));
            }
            continue;
        }
        if (e.cam >= n_cameras_ || e.u < 0 || e.v < 0) {
            throw FormatError(FormatErrc::out_of_bounds, "entry at offset " + std::to_string(i));
        }
        max_u_ = std::max(max_u_, e.u);
        max_v_ = std::max(max_v_, e.v);
    }
    if (entries_.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument("lookup table is limited to 2^32 voxels");
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        (entries_[i].isSentinel() ? unmapped_ : gather_order_).push_back(static_cast<std::uint32_t>(i));
    }
    std::sort(gather_order_.begin(), gather_order_.end(), [this](std::uint32_t a, std::uint32_t b) {
        const LutEntry &ea = entries_[a];
        const LutEntry &eb = entries_[b];
        return std::tie(ea.cam, ea.v, ea.u, a) < std::tie(eb.cam, eb.v, eb.u, b);
    });
}

double LookupTable::fillFraction(std::int32_t cam) const {
    const auto hits = std::count_if(entries_.begin(), entries_.end(), [cam](const LutEntry &e) {
        return cam < 0 ? !e.isSentinel() : e.cam == cam;
    });
    return static_cast<double>(hits) / static_cast<double>(entries_.size());
}

std::optional<PixelIndex> visiblePixel(const Camera &cam, const Vec3 &p_ego) {
    const auto px = projectPoint(p_ego, cam.intrinsics, cam.cam_from_ego);
    if (!px || !(px->u >= 0.0 && px->u < cam.intrinsics.width && px->v >= 0.0 &&
                 px->v < cam.intrinsics.height)) {
        return std::nullopt;
    }
    return PixelIndex{static_cast<std::int32_t>(std::floor(px->u)), static_cast<std::int32_t>(std::floor(px->v))};
}

LutEntry firstVisibleView(const CameraRig &rig, const Vec3 &p_ego) {
    for (std::size_t c = 0; c < rig.size(); ++c) {
        if (const auto px = visiblePixel(rig[c], p_ego)) {
            return {static_cast<std::int32_t>(c), px->u, px->v};
        }
    }
    return LutEntry::sentinel();
}

LookupTable buildLut(const CameraRig &rig, const VoxelGridSpec &grid, int threads) {
    grid.validate();
    if (rig.empty()) {
        throw std::invalid_argument("cannot build a lookup table for an empty rig");
    }
    std::vector<LutEntry> entries(grid.voxelCount());
    const std::size_t plane = static_cast<std::size_t>(grid.ny() * grid.nz());
    parallelFor(entries.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t offset = begin; offset < end; ++offset) {
            const auto i = static_cast<std::int64_t>(offset / plane);
            const auto j = static_cast<std::int64_t>((offset % plane) / static_cast<std::size_t>(grid.nz()));
            const auto k = static_cast<std::int64_t>(offset % static_cast<std::size_t>(grid.nz()));
            entries[offset] = firstVisibleView(rig, {grid.x.center(i), grid.y.center(j), grid.z.center(k)});
        }
    });
    return LookupTable(grid, static_cast<std::int32_t>(rig.size()), std::move(entries));
}

CameraRig historyAlignedRig(const CameraRig &rig, const RigidTransform &ego_cur_from_ego_hist) {
    const RigidTransform ego_hist_from_ego_cur = ego_cur_from_ego_hist.inverse();
    std::vector<Camera> cams(rig.cameras());
    for (auto &cam : cams) {
        cam.cam_from_ego = cam.cam_from_ego * ego_hist_from_ego_cur;
    }
    return CameraRig(std::move(cams));
}

LookupTable buildHistoryLut(const CameraRig &rig, const VoxelGridSpec &grid,
                            const RigidTransform &ego_cur_from_ego_hist, int threads) {
    return buildLut(historyAlignedRig(rig, ego_cur_from_ego_hist), grid, threads);
}

std::vector<std::uint8_t> serializeLut(const LookupTable &lut) {
    std::vector<std::uint8_t> out;
    out.reserve(kLutHeaderBytes + lut.size() * kLutRecordBytes);
    for (const char c : {'F', 'B', 'L', 'T'}) {
        out.push_back(static_cast<std::uint8_t>(c));
    }
    detail::putU32(out, kLutFormatVersion);
    detail::putU32(out, static_cast<std::uint32_t>(lut.grid().nx()));
    detail::putU32(out, static_cast<std::uint32_t>(lut.grid().ny()));
    detail::putU32(out, static_cast<std::uint32_t>(lut.grid().nz()));
    detail::putU32(out, static_cast<std::uint32_t>(lut.cameraCount()));
    out.insert(out.end(), 8, std::uint8_t{0});
    for (const LutEntry &e : lut.entries()) {
        detail::putI32(out, e.cam);
        detail::putI32(out, e.u);
        detail::putI32(out, e.v);
    }
    return out;
}

LookupTable deserializeLut(std::span<const std::uint8_t> bytes, const VoxelGridSpec &grid_range) {
    if (bytes.size() < 4 || bytes[0] != 'F' || bytes[1] != 'B' || bytes[2] != 'L' || bytes[3] != 'T') {
        throw FormatError(FormatErrc::bad_magic, "expected FBLT");
    }
    if (bytes.size() < kLutHeaderBytes) {
        throw FormatError(FormatErrc::truncated, "header is shorter than 32 bytes");
    }
    const std::uint32_t version = detail::getU32(bytes, 4);
    if (version != kLutFormatVersion) {
        throw FormatError(FormatErrc::version_mismatch, "got version " + std::to_string(version));
    }
    VoxelGridSpec grid = grid_range;
    grid.x.cells = detail::getU32(bytes, 8);
    grid.y.cells = detail::getU32(bytes, 12);
    grid.z.cells = detail::getU32(bytes, 16);
    const std::uint32_t n_cameras = detail::getU32(bytes, 20);
    if (grid.x.cells < 1 || grid.y.cells < 1 || grid.z.cells < 1 || n_cameras < 1 ||
        n_cameras > static_cast<std::uint32_t>(INT32_MAX)) {
        throw FormatError(FormatErrc::out_of_bounds, "header declares an empty grid or camera set");
    }
    for (std::size_t b = 24; b < kLutHeaderBytes; ++b) {
        if (bytes[b] != 0) {
            throw FormatError(FormatErrc::out_of_bounds, "reserved header bytes must be zero");
        }
    }
    const std::size_t count = grid.voxelCount();
    if (bytes.size() - kLutHeaderBytes < count * kLutRecordBytes) {
        throw FormatError(FormatErrc::truncated,
                          "expected " + std::to_string(count) + " records, payload holds " +
                              std::to_string((bytes.size() - kLutHeaderBytes) / kLutRecordBytes));
    }
    if (bytes.size() - kLutHeaderBytes > count * kLutRecordBytes) {
        throw FormatError(FormatErrc::shape_mismatch, "trailing bytes after last record");
    }
    std::vector<LutEntry> entries(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t at = kLutHeaderBytes + i * kLutRecordBytes;
        entries[i] = {detail::getI32(bytes, at), detail::getI32(bytes, at + 4), detail::getI32(bytes, at + 8)};
    }
    return LookupTable(grid, static_cast<std::int32_t>(n_cameras), std::move(entries));
}

void writeLut(const std::filesystem::path &path, const LookupTable &lut) {
    detail::writeFileBytes(path, serializeLut(lut));
}

LookupTable readLut(const std::filesystem::path &path, const VoxelGridSpec &grid_range) {
    return deserializeLut(detail::readFileBytes(path), grid_range);
}

} // namespace fastray
