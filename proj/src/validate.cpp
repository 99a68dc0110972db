// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/validate.hpp"

#include "fastray/bench.hpp"
#include "fastray/bevops.hpp"
#include "fastray/viewtrans.hpp"

#include <Eigen/Core>

#include <cmath>
#include <sstream>

namespace fastray {

std::vector<LutEntry> exhaustiveLutOracle(const CameraRig &rig, const VoxelGridSpec &grid) {
    std::vector<Eigen::Matrix<double, 3, 4>> projections;
    for (const auto &cam : rig) {
        projections.push_back(cam.intrinsics.matrix() * cam.cam_from_ego.matrix().topRows<3>());
    }
    std::vector<LutEntry> out;
    out.reserve(grid.voxelCount());
    for (std::int64_t i = 0; i < grid.nx(); ++i) {
        for (std::int64_t j = 0; j < grid.ny(); ++j) {
            for (std::int64_t k = 0; k < grid.nz(); ++k) {
                const Eigen::Vector4d p(grid.x.min + (i + 0.5) * ((grid.x.max - grid.x.min) / grid.x.cells),
                                        grid.y.min + (j + 0.5) * ((grid.y.max - grid.y.min) / grid.y.cells),
                                        grid.z.min + (k + 0.5) * ((grid.z.max - grid.z.min) / grid.z.cells), 1.0);
                LutEntry hit = LutEntry::sentinel();
                for (std::size_t c = 0; c < rig.size(); ++c) {
                    const Eigen::Vector3d h = projections[c] * p;
                    if (!(h.z() > 0.0)) {
                        continue;
                    }
                    const double u = h.x() / h.z();
                    const double v = h.y() / h.z();
                    if (u >= 0.0 && u < rig[c].intrinsics.width && v >= 0.0 && v < rig[c].intrinsics.height) {
                        hit = {static_cast<std::int32_t>(c), static_cast<std::int32_t>(std::floor(u)),
                               static_cast<std::int32_t>(std::floor(v))};
                        break;
                    }
                }
                out.push_back(hit);
            }
        }
    }
    return out;
}

namespace {

std::size_t countMismatches(const std::vector<LutEntry> &a, std::span<const LutEntry> b) {
    std::size_t bad = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        bad += a[i] == b[i] ? 0 : 1;
    }
    return bad;
}

} // namespace

std::vector<PropertyResult> runValidation(const CameraRig &rig, const VoxelGridSpec &grid, std::uint64_t seed,
                                          int channels) {
    std::vector<PropertyResult> results;
    auto record = [&](std::string name, bool ok, std::string detail) {
        results.push_back({std::move(name), ok, std::move(detail)});
    };

    const LookupTable lut = buildLut(rig, grid, 1);
    {
        const auto oracle = exhaustiveLutOracle(rig, grid);
        const std::size_t bad = countMismatches(oracle, lut.entries());
        record("lut_matches_exhaustive_oracle", bad == 0, std::to_string(bad) + " of " + std::to_string(lut.size()) + " entries differ");
    }
    {
        std::size_t violations = 0;
        for (std::size_t offset = 0; offset < lut.size(); ++offset) {
            const LutEntry e = lut[offset];
            if (e.isSentinel()) {
                continue;
            }
            const auto i = static_cast<std::int64_t>(offset / static_cast<std::size_t>(grid.ny() * grid.nz()));
            const auto j = static_cast<std::int64_t>((offset / static_cast<std::size_t>(grid.nz())) % static_cast<std::size_t>(grid.ny()));
            const auto k = static_cast<std::int64_t>(offset % static_cast<std::size_t>(grid.nz()));
            const Vec3 center = voxelCenter(grid, i, j, k);
            for (std::int32_t c = 0; c < e.cam; ++c) {
                violations += visiblePixel(rig[static_cast<std::size_t>(c)], center) ? 1 : 0;
            }
        }
        record("first_view_property", violations == 0, std::to_string(violations) + " entries shadowed by a lower-index camera");
    }
    {
        const LookupTable threaded = buildLut(rig, grid, 4);
        const bool same = serializeLut(threaded) == serializeLut(lut);
        record("lut_deterministic_across_threads", same, same ? "1 and 4 threads byte-identical" : "tables differ");
    }
    {
        const auto bytes = serializeLut(lut);
        const bool same = serializeLut(deserializeLut(bytes, grid)) == bytes;
        record("lut_serialization_roundtrip", same, std::to_string(bytes.size()) + " bytes");
    }
    {
        const bool same = serializeLut(buildHistoryLut(rig, grid, RigidTransform::identity())) == serializeLut(lut);
        record("history_lut_zero_motion", same, same ? "identical to current-frame table" : "tables differ");
    }

    // Feature maps sized to the largest camera image.
    int height = 1;
    int width = 1;
    for (const auto &cam : rig) {
        height = std::max(height, cam.intrinsics.height);
        width = std::max(width, cam.intrinsics.width);
    }
    BenchConfig config;
    config.n_cameras = static_cast<int>(rig.size());
    config.channels = channels;
    config.feat_height = height;
    config.feat_width = width;
    const FeatureStack features = synthFeatures(config, seed);
    const VoxelVolume fast = fastRayTransform(features, lut);
    {
        const VoxelVolume naive = naiveTransform(features, rig, grid, Aggregation::first_view);
        std::size_t bad = 0;
        for (std::size_t i = 0; i < fast.data.size(); ++i) {
            bad += fast.data[i] == naive.data[i] ? 0 : 1;
        }
        record("fast_ray_equals_naive_first_view", bad == 0, std::to_string(bad) + " elements differ");
    }
    {
        std::size_t bad = 0;
        for (std::size_t offset = 0; offset < lut.size(); ++offset) {
            if (!lut[offset].isSentinel()) {
                continue;
            }
            for (std::int64_t c = 0; c < fast.channels; ++c) {
                bad += fast.data[offset * static_cast<std::size_t>(fast.channels) + static_cast<std::size_t>(c)] == 0.0f ? 0 : 1;
            }
        }
        record("unmapped_voxels_zero", bad == 0, std::to_string(bad) + " nonzero elements in unmapped voxels");
    }
    {
        const BevFeature bev = spaceToChannel(fast);
        const VoxelVolume back = channelToSpace(bev, grid, fast.channels);
        const bool same = back.data == fast.data && bev.channels == grid.nz() * fast.channels;
        record("space_to_channel_bijection", same, "channels " + std::to_string(bev.channels));
    }
    {
        std::ostringstream os;
        os.precision(4);
        os << "union " << lut.fillFraction();
        for (std::int32_t c = 0; c < lut.cameraCount(); ++c) {
            os << "; " << rig[static_cast<std::size_t>(c)].name << " " << lut.fillFraction(c);
        }
        record("fill_fraction_report", true, os.str());
    }
    return results;
}

} // namespace fastray
