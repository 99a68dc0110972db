// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/temporal.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fastray {

BevFeature alignToCurrent(const FrameSample &hist, const RigidTransform &cur_pose, const VoxelGridSpec &grid,
                          Interpolation mode) {
    const BevFeature &src = hist.bev;
    src.validate();
    grid.validate();
    if (src.nx != grid.nx() || src.ny != grid.ny()) {
        throw std::invalid_argument("history BEV is " + std::to_string(src.nx) + "x" + std::to_string(src.ny) +
                                    ", grid is " + std::to_string(grid.nx()) + "x" + std::to_string(grid.ny()));
    }
    const RigidTransform hist_from_cur = hist.world_from_ego.inverse() * cur_pose;
    const double px = grid.x.pitch();
    const double py = grid.y.pitch();
    const std::int64_t channels = src.channels;

    BevFeature out(src.nx, src.ny, channels);
    for (std::int64_t i = 0; i < src.nx; ++i) {
        for (std::int64_t j = 0; j < src.ny; ++j) {
            const Vec3 p = hist_from_cur(Vec3(grid.x.center(i), grid.y.center(j), 0.0));
            // Fractional cell coordinates; integer values are cell centers.
            const double fi = (p.x() - grid.x.min) / px - 0.5;
            const double fj = (p.y() - grid.y.min) / py - 0.5;
            float *dst = out.data.data() + out.index(i, j, 0);
            if (mode == Interpolation::nearest) {
                const double ri = std::round(fi);
                const double rj = std::round(fj);
                if (ri < 0.0 || rj < 0.0 || ri >= static_cast<double>(src.nx) || rj >= static_cast<double>(src.ny)) {
                    continue;
                }
                const float *s = src.data.data() + src.index(static_cast<std::int64_t>(ri), static_cast<std::int64_t>(rj), 0);
                std::copy_n(s, channels, dst);
                continue;
            }
            const double fi0 = std::floor(fi);
            const double fj0 = std::floor(fj);
            const double li = fi - fi0;
            const double lj = fj - fj0;
            const auto i0 = static_cast<std::int64_t>(fi0);
            const auto j0 = static_cast<std::int64_t>(fj0);
            const std::int64_t ci[2] = {i0, i0 + 1};
            const std::int64_t cj[2] = {j0, j0 + 1};
            const double wi[2] = {1.0 - li, li};
            const double wj[2] = {1.0 - lj, lj};
            std::vector<double> acc(static_cast<std::size_t>(channels), 0.0);
            bool any = false;
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    if (ci[a] < 0 || cj[b] < 0 || ci[a] >= src.nx || cj[b] >= src.ny) {
                        continue;
                    }
                    const double w = wi[a] * wj[b];
                    if (w == 0.0) {
                        continue;
                    }
                    any = true;
                    const float *s = src.data.data() + src.index(ci[a], cj[b], 0);
                    for (std::int64_t c = 0; c < channels; ++c) {
                        acc[static_cast<std::size_t>(c)] += w * s[c];
                    }
                }
            }
            if (any) {
                for (std::int64_t c = 0; c < channels; ++c) {
                    dst[c] = static_cast<float>(acc[static_cast<std::size_t>(c)]);
                }
            }
        }
    }
    return out;
}

BevFeature fuseFrames(const BevFeature &current, std::span<const FrameSample> history,
                      const RigidTransform &cur_pose, const VoxelGridSpec &grid, Interpolation mode) {
    std::vector<BevFeature> stack;
    stack.reserve(history.size() + 1);
    stack.push_back(current);
    for (const auto &frame : history) {
        stack.push_back(alignToCurrent(frame, cur_pose, grid, mode));
    }
    return concatChannels(stack);
}

} // namespace fastray
