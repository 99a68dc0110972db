// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/viewtrans.hpp"

#include "fastray/parallel.hpp"
#include "fastray/projection_counter.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fastray {

FeatureStack::FeatureStack(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w)
    : n_cameras(n), channels(c), height(h), width(w) {
    if (n < 1 || c < 1 || h < 1 || w < 1) {
        throw std::invalid_argument("feature stack dims must be >= 1");
    }
    data.assign(static_cast<std::size_t>(n * c * h * w), 0.0f);
}

void FeatureStack::validate() const {
    if (n_cameras < 1 || channels < 1 || height < 1 || width < 1) {
        throw std::invalid_argument("feature stack dims must be >= 1");
    }
    if (data.size() != static_cast<std::size_t>(n_cameras * channels * height * width)) {
        throw std::invalid_argument("feature stack data length does not match N*C*H*W");
    }
}

VoxelVolume::VoxelVolume(const VoxelGridSpec &g, std::int64_t c) : grid(g), channels(c) {
    grid.validate();
    if (c < 1) {
        throw std::invalid_argument("voxel volume needs at least one channel");
    }
    data.assign(grid.voxelCount() * static_cast<std::size_t>(c), 0.0f);
}

DepthDistribution::DepthDistribution(std::int64_t n, std::vector<double> bin_centers, std::int64_t h, std::int64_t w)
    : n_cameras(n), height(h), width(w), bin_depths(std::move(bin_centers)) {
    if (n < 1 || h < 1 || w < 1 || bin_depths.empty()) {
        throw std::invalid_argument("depth distribution dims must be >= 1");
    }
    weights.assign(static_cast<std::size_t>(n * bins() * h * w), 0.0f);
}

DepthDistribution DepthDistribution::uniform(std::int64_t n, std::vector<double> bins, std::int64_t h,
                                             std::int64_t w) {
    DepthDistribution d(n, std::move(bins), h, w);
    std::fill(d.weights.begin(), d.weights.end(), 1.0f / static_cast<float>(d.bins()));
    return d;
}

namespace {

void checkRigMatchesFeatures(const FeatureStack &features, const CameraRig &rig) {
    features.validate();
    if (rig.empty()) {
        throw std::invalid_argument("rig has no cameras");
    }
    if (static_cast<std::int64_t>(rig.size()) != features.n_cameras) {
        std::ostringstream os;
        os << "rig has " << rig.size() << " cameras, features have " << features.n_cameras;
        throw std::invalid_argument(os.str());
    }
    for (const auto &cam : rig) {
        if (cam.intrinsics.width > features.width || cam.intrinsics.height > features.height) {
            throw std::invalid_argument("camera '" + cam.name + "' image is larger than the feature map");
        }
    }
}

} // namespace

namespace {

void gatherInto(const FeatureStack &features, const LookupTable &lut, VoxelVolume &out, bool zero_unmapped,
                int threads) {
    features.validate();
    if (features.n_cameras != lut.cameraCount()) {
        std::ostringstream os;
        os << "table built for " << lut.cameraCount() << " cameras, features have " << features.n_cameras;
        throw std::invalid_argument(os.str());
    }
    if (lut.maxU() >= features.width || lut.maxV() >= features.height) {
        std::ostringstream os;
        os << "table addresses pixel (" << lut.maxU() << ", " << lut.maxV() << ") outside " << features.width << "x"
           << features.height << " features";
        throw std::invalid_argument(os.str());
    }
    const std::size_t channels = static_cast<std::size_t>(features.channels);
    if (out.channels != features.channels || out.data.size() != lut.size() * channels) {
        throw std::invalid_argument("output volume shape does not match table and features");
    }
    const std::size_t plane = static_cast<std::size_t>(features.height * features.width);
    const std::size_t cam_stride = channels * plane;
    const std::size_t width = static_cast<std::size_t>(features.width);
    const float *src = features.data.data();
    float *dst = out.data.data();
    const LutEntry *entries = lut.entries().data();

    if (zero_unmapped) {
        for (const std::uint32_t offset : lut.unmappedOffsets()) {
            std::fill_n(dst + offset * channels, channels, 0.0f);
        }
    }
    const std::span<const std::uint32_t> order = lut.gatherOrder();
    parallelFor(order.size(), threads, [&](std::size_t begin, std::size_t end) {
        LutEntry prev = LutEntry::sentinel();
        const float *prev_voxel = nullptr;
        for (std::size_t n = begin; n < end; ++n) {
            const std::size_t offset = order[n];
            const LutEntry e = entries[offset];
            float *voxel = dst + offset * channels;
            if (e == prev) {
                std::copy_n(prev_voxel, channels, voxel);
                continue;
            }
            const float *pixel = src + static_cast<std::size_t>(e.cam) * cam_stride +
                                 static_cast<std::size_t>(e.v) * width + static_cast<std::size_t>(e.u);
            for (std::size_t c = 0; c < channels; ++c) {
                voxel[c] = pixel[c * plane];
            }
            prev = e;
            prev_voxel = voxel;
        }
    });
}

} // namespace

void fastRayTransformInto(const FeatureStack &features, const LookupTable &lut, VoxelVolume &out, int threads) {
    gatherInto(features, lut, out, true, threads);
}

VoxelVolume fastRayTransform(const FeatureStack &features, const LookupTable &lut, int threads) {
    VoxelVolume out(lut.grid(), features.channels);
    gatherInto(features, lut, out, false, threads);
    return out;
}

VoxelVolume naiveTransform(const FeatureStack &features, const CameraRig &rig, const VoxelGridSpec &grid,
                           Aggregation aggregation, int threads) {
    grid.validate();
    checkRigMatchesFeatures(features, rig);
    const std::size_t voxels = grid.voxelCount();
    const std::size_t channels = static_cast<std::size_t>(features.channels);
    const std::size_t plane = static_cast<std::size_t>(features.height * features.width);
    const std::size_t yz = static_cast<std::size_t>(grid.ny() * grid.nz());
    const std::size_t nz = static_cast<std::size_t>(grid.nz());

    // One dense volume and hit mask per camera.
    std::vector<std::vector<float>> per_camera(rig.size());
    std::vector<std::vector<std::uint8_t>> hits(rig.size());
    for (std::size_t cam = 0; cam < rig.size(); ++cam) {
        per_camera[cam].assign(voxels * channels, 0.0f);
        hits[cam].assign(voxels, 0);
        const Camera &camera = rig[cam];
        const float *src = features.data.data() + cam * channels * plane;
        float *dst = per_camera[cam].data();
        std::uint8_t *mask = hits[cam].data();
        parallelFor(voxels, threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t offset = begin; offset < end; ++offset) {
                const Vec3 center(grid.x.center(static_cast<std::int64_t>(offset / yz)),
                                  grid.y.center(static_cast<std::int64_t>((offset % yz) / nz)),
                                  grid.z.center(static_cast<std::int64_t>(offset % nz)));
                const auto px = visiblePixel(camera, center);
                if (!px) {
                    continue;
                }
                mask[offset] = 1;
                const float *pixel = src + static_cast<std::size_t>(px->v) * static_cast<std::size_t>(features.width) +
                                     static_cast<std::size_t>(px->u);
                for (std::size_t c = 0; c < channels; ++c) {
                    dst[offset * channels + c] = pixel[c * plane];
                }
            }
        });
    }
    countProjections(voxels * rig.size());

    VoxelVolume out(grid, features.channels);
    float *result = out.data.data();
    if (aggregation == Aggregation::first_view) {
        // Dense select over every camera volume, last camera first, so the
        // lowest-index hit is written last.
        for (std::size_t cam = rig.size(); cam-- > 0;) {
            const float *vol = per_camera[cam].data();
            const std::uint8_t *mask = hits[cam].data();
            parallelFor(voxels, threads, [&](std::size_t begin, std::size_t end) {
                for (std::size_t offset = begin; offset < end; ++offset) {
                    const bool hit = mask[offset] != 0;
                    for (std::size_t c = 0; c < channels; ++c) {
                        const std::size_t idx = offset * channels + c;
                        result[idx] = hit ? vol[idx] : result[idx];
                    }
                }
            });
        }
    } else {
        parallelFor(voxels, threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t offset = begin; offset < end; ++offset) {
                int count = 0;
                for (std::size_t cam = 0; cam < rig.size(); ++cam) {
                    count += hits[cam][offset];
                    for (std::size_t c = 0; c < channels; ++c) {
                        result[offset * channels + c] += per_camera[cam][offset * channels + c];
                    }
                }
                if (count > 1) {
                    for (std::size_t c = 0; c < channels; ++c) {
                        result[offset * channels + c] /= static_cast<float>(count);
                    }
                }
            }
        });
    }
    return out;
}

VoxelVolume lssReferenceTransform(const FeatureStack &features, const DepthDistribution &depth,
                                  const CameraRig &rig, const VoxelGridSpec &grid, int threads) {
    grid.validate();
    checkRigMatchesFeatures(features, rig);
    if (depth.n_cameras != features.n_cameras || depth.height != features.height || depth.width != features.width) {
        throw std::invalid_argument("depth distribution dims do not match features");
    }
    if (depth.weights.size() != static_cast<std::size_t>(depth.n_cameras * depth.bins() * depth.height * depth.width)) {
        throw std::invalid_argument("depth distribution data length does not match N*D*H*W");
    }
    for (std::int64_t d = 0; d < depth.bins(); ++d) {
        const double z = depth.bin_depths[static_cast<std::size_t>(d)];
        if (!(z > 0.0) || (d > 0 && !(z > depth.bin_depths[static_cast<std::size_t>(d - 1)]))) {
            throw std::invalid_argument("depth bins must be positive and strictly increasing");
        }
    }

    const std::size_t channels = static_cast<std::size_t>(features.channels);
    const std::size_t voxels = grid.voxelCount();
    const std::int64_t h = features.height;
    const std::int64_t w = features.width;
    const std::size_t plane = static_cast<std::size_t>(h * w);
    const double px = grid.x.pitch();
    const double py = grid.y.pitch();
    const double pz = grid.z.pitch();

    // One double accumulator per worker, stored at the worker's first camera.
    std::vector<std::vector<double>> partial(rig.size());
    parallelFor(rig.size(), threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> &acc = partial[begin];
        acc.assign(voxels * channels, 0.0);
        for (std::size_t cam = begin; cam < end; ++cam) {
            const Camera &camera = rig[cam];
            const auto &k = camera.intrinsics;
            const Mat3 ego_from_cam_rot = camera.cam_from_ego.rotation().transpose();
            const Vec3 origin = -(ego_from_cam_rot * camera.cam_from_ego.translation());
            const bool affine = !k.image_affine.isIdentity(0.0);
            const Mat3 affine_inv = affine ? Mat3(k.image_affine.inverse()) : Mat3::Identity();
            const float *feat = features.data.data() + cam * channels * plane;
            for (std::int64_t v = 0; v < h; ++v) {
                for (std::int64_t u = 0; u < w; ++u) {
                    Eigen::Vector3d pix(static_cast<double>(u) + 0.5, static_cast<double>(v) + 0.5, 1.0);
                    if (affine) {
                        pix = affine_inv * pix;
                    }
                    // Ray through the pixel center at unit camera depth, in ego axes.
                    const Vec3 ray = ego_from_cam_rot * Vec3((pix.x() - k.cx) / k.fx, (pix.y() - k.cy) / k.fy, 1.0);
                    const std::size_t pixel = static_cast<std::size_t>(v * w + u);
                    for (std::int64_t d = 0; d < depth.bins(); ++d) {
                        const float weight = depth.weights[depth.index(static_cast<std::int64_t>(cam), d, v, u)];
                        if (weight == 0.0f) {
                            continue;
                        }
                        const Vec3 p = origin + depth.bin_depths[static_cast<std::size_t>(d)] * ray;
                        const double fi = std::floor((p.x() - grid.x.min) / px);
                        const double fj = std::floor((p.y() - grid.y.min) / py);
                        const double fk = std::floor((p.z() - grid.z.min) / pz);
                        if (!(fi >= 0.0 && fi < static_cast<double>(grid.nx()) && fj >= 0.0 &&
                              fj < static_cast<double>(grid.ny()) && fk >= 0.0 && fk < static_cast<double>(grid.nz()))) {
                            continue;
                        }
                        double *voxel = acc.data() + grid.offset(static_cast<std::int64_t>(fi), static_cast<std::int64_t>(fj),
                                                                static_cast<std::int64_t>(fk)) *
                                                        channels;
                        for (std::size_t c = 0; c < channels; ++c) {
                            voxel[c] += static_cast<double>(feat[c * plane + pixel]) * weight;
                        }
                    }
                }
            }
        }
    });
    countProjections(rig.size() * plane * static_cast<std::size_t>(depth.bins()));

    VoxelVolume out(grid, features.channels);
    parallelFor(out.data.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double sum = 0.0;
            for (const auto &acc : partial) {
                if (!acc.empty()) {
                    sum += acc[i];
                }
            }
            out.data[i] = static_cast<float>(sum);
        }
    });
    return out;
}

std::vector<VoxelGridSpec> defaultPyramidGrids(const VoxelGridSpec &base) {
    std::vector<VoxelGridSpec> grids;
    for (std::int64_t cells : {200, 150, 100}) {
        VoxelGridSpec g = base;
        g.x.cells = cells;
        g.y.cells = cells;
        grids.push_back(g);
    }
    return grids;
}

std::vector<LookupTable> buildPyramidLuts(const CameraRig &rig, std::span<const int> strides,
                                          std::span<const VoxelGridSpec> grids, int threads) {
    if (strides.size() != grids.size()) {
        throw std::invalid_argument("pyramid has " + std::to_string(strides.size()) + " strides but " +
                                    std::to_string(grids.size()) + " grids");
    }
    std::vector<LookupTable> luts;
    luts.reserve(strides.size());
    for (std::size_t level = 0; level < strides.size(); ++level) {
        luts.push_back(buildLut(scaleRig(rig, strides[level]), grids[level], threads));
    }
    return luts;
}

std::vector<VoxelVolume> multiScaleTransform(std::span<const FeatureStack> pyramid, std::span<const LookupTable> luts,
                                             int threads) {
    if (pyramid.size() != luts.size()) {
        throw std::invalid_argument("pyramid has " + std::to_string(pyramid.size()) + " levels but " +
                                    std::to_string(luts.size()) + " tables");
    }
    std::vector<VoxelVolume> volumes;
    volumes.reserve(pyramid.size());
    for (std::size_t level = 0; level < pyramid.size(); ++level) {
        volumes.push_back(fastRayTransform(pyramid[level], luts[level], threads));
    }
    return volumes;
}

std::vector<VoxelVolume> multiScaleTransform(std::span<const FeatureStack> pyramid, std::span<const int> strides,
                                             const CameraRig &rig, std::span<const VoxelGridSpec> grids,
                                             int threads) {
    if (pyramid.size() != strides.size() || pyramid.size() != grids.size()) {
        throw std::invalid_argument("pyramid, stride and grid level counts differ");
    }
    const auto luts = buildPyramidLuts(rig, strides, grids, threads);
    return multiScaleTransform(pyramid, std::span<const LookupTable>(luts), threads);
}

} // namespace fastray
