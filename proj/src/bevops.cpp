// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/bevops.hpp"

#include "fastray/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace fastray {

BevFeature::BevFeature(std::int64_t x, std::int64_t y, std::int64_t c) : nx(x), ny(y), channels(c) {
    if (x < 1 || y < 1 || c < 1) {
        throw std::invalid_argument("BEV dims must be >= 1");
    }
    data.assign(static_cast<std::size_t>(x * y * c), 0.0f);
}

void BevFeature::validate() const {
    if (nx < 1 || ny < 1 || channels < 1) {
        throw std::invalid_argument("BEV dims must be >= 1");
    }
    if (data.size() != static_cast<std::size_t>(nx * ny * channels)) {
        throw std::invalid_argument("BEV data length does not match X*Y*C");
    }
}

BevFeature spaceToChannel(const VoxelVolume &volume) {
    return spaceToChannel(VoxelVolume(volume));
}

BevFeature spaceToChannel(VoxelVolume &&volume) {
    BevFeature bev;
    bev.nx = volume.grid.nx();
    bev.ny = volume.grid.ny();
    bev.channels = volume.grid.nz() * volume.channels;
    bev.data = std::move(volume.data);
    bev.validate();
    return bev;
}

VoxelVolume channelToSpace(const BevFeature &bev, const VoxelGridSpec &grid, std::int64_t channels) {
    bev.validate();
    if (bev.nx != grid.nx() || bev.ny != grid.ny() || bev.channels != grid.nz() * channels) {
        throw std::invalid_argument("BEV shape does not factor into the requested grid and channels");
    }
    VoxelVolume v;
    v.grid = grid;
    v.channels = channels;
    v.data = bev.data;
    return v;
}

namespace {

// Half-pixel source coordinate, clamped to the valid sample range.
double linearSource(std::int64_t dst, std::int64_t in, std::int64_t out) {
    const double src = (static_cast<double>(dst) + 0.5) * static_cast<double>(in) / static_cast<double>(out) - 0.5;
    return std::clamp(src, 0.0, static_cast<double>(in - 1));
}

std::int64_t nearestSource(std::int64_t dst, std::int64_t in, std::int64_t out) {
    return std::min(in - 1, (dst * in) / out);
}

} // namespace

BevFeature upsampleBev(const BevFeature &bev, std::int64_t nx, std::int64_t ny, Interpolation mode) {
    bev.validate();
    if (nx < bev.nx || ny < bev.ny) {
        throw std::invalid_argument("upsample target " + std::to_string(nx) + "x" + std::to_string(ny) +
                                    " is smaller than source " + std::to_string(bev.nx) + "x" + std::to_string(bev.ny));
    }
    BevFeature out(nx, ny, bev.channels);
    const std::int64_t channels = bev.channels;
    for (std::int64_t i = 0; i < nx; ++i) {
        for (std::int64_t j = 0; j < ny; ++j) {
            float *dst = out.data.data() + out.index(i, j, 0);
            if (mode == Interpolation::nearest) {
                const float *src = bev.data.data() + bev.index(nearestSource(i, bev.nx, nx), nearestSource(j, bev.ny, ny), 0);
                std::copy_n(src, channels, dst);
                continue;
            }
            const double si = linearSource(i, bev.nx, nx);
            const double sj = linearSource(j, bev.ny, ny);
            const auto i0 = static_cast<std::int64_t>(std::floor(si));
            const auto j0 = static_cast<std::int64_t>(std::floor(sj));
            const std::int64_t i1 = std::min(i0 + 1, bev.nx - 1);
            const std::int64_t j1 = std::min(j0 + 1, bev.ny - 1);
            const double li = si - static_cast<double>(i0);
            const double lj = sj - static_cast<double>(j0);
            for (std::int64_t c = 0; c < channels; ++c) {
                // Difference form keeps constant fields bit-exact.
                const double a00 = bev.at(i0, j0, c);
                const double a01 = bev.at(i0, j1, c);
                const double a10 = bev.at(i1, j0, c);
                const double a11 = bev.at(i1, j1, c);
                const double top = a00 + lj * (a01 - a00);
                const double bottom = a10 + lj * (a11 - a10);
                dst[c] = static_cast<float>(top + li * (bottom - top));
            }
        }
    }
    return out;
}

BevFeature concatChannels(std::span<const BevFeature> features) {
    if (features.empty()) {
        throw std::invalid_argument("cannot concatenate an empty list of BEV features");
    }
    std::int64_t total = 0;
    for (const auto &f : features) {
        f.validate();
        if (f.nx != features[0].nx || f.ny != features[0].ny) {
            throw std::invalid_argument("BEV spatial sizes differ in concat");
        }
        total += f.channels;
    }
    BevFeature out(features[0].nx, features[0].ny, total);
    for (std::int64_t cell = 0; cell < out.nx * out.ny; ++cell) {
        float *dst = out.data.data() + cell * total;
        for (const auto &f : features) {
            dst = std::copy_n(f.data.data() + cell * f.channels, f.channels, dst);
        }
    }
    return out;
}

BevFeature sliceChannels(const BevFeature &bev, std::int64_t first, std::int64_t count) {
    bev.validate();
    if (first < 0 || count < 1 || first + count > bev.channels) {
        throw std::invalid_argument("channel slice out of range");
    }
    BevFeature out(bev.nx, bev.ny, count);
    for (std::int64_t cell = 0; cell < bev.nx * bev.ny; ++cell) {
        std::copy_n(bev.data.data() + cell * bev.channels + first, count, out.data.data() + cell * count);
    }
    return out;
}

void FusionWeights::validate() const {
    if (in_channels < 1 || out_channels < 1) {
        throw std::invalid_argument("fusion weights need at least one input and output channel");
    }
    if (matrix.size() != static_cast<std::size_t>(in_channels * out_channels)) {
        throw std::invalid_argument("fusion matrix size does not match out x in");
    }
    if (bias && bias->size() != static_cast<std::size_t>(out_channels)) {
        throw std::invalid_argument("fusion bias size does not match out channels");
    }
    const auto finite = [](float x) { return std::isfinite(x); };
    if (!std::all_of(matrix.begin(), matrix.end(), finite) || (bias && !std::all_of(bias->begin(), bias->end(), finite))) {
        throw std::invalid_argument("fusion weights must be finite");
    }
}

FusionWeights FusionWeights::identity(std::int64_t channels) {
    FusionWeights w{channels, channels, std::vector<float>(static_cast<std::size_t>(channels * channels), 0.0f), {}};
    for (std::int64_t c = 0; c < channels; ++c) {
        w.matrix[static_cast<std::size_t>(c * channels + c)] = 1.0f;
    }
    return w;
}

FusionWeights FusionWeights::random(std::int64_t in, std::int64_t out, std::uint64_t seed, float scale,
                                    bool with_bias) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-scale, scale);
    FusionWeights w{in, out, std::vector<float>(static_cast<std::size_t>(in * out)), {}};
    for (auto &x : w.matrix) {
        x = dist(rng);
    }
    if (with_bias) {
        w.bias.emplace(static_cast<std::size_t>(out));
        for (auto &x : *w.bias) {
            x = dist(rng);
        }
    }
    return w;
}

BevFeature fuseChannels(const BevFeature &bev, const FusionWeights &weights, int threads) {
    bev.validate();
    weights.validate();
    if (bev.channels != weights.in_channels) {
        throw std::invalid_argument("BEV has " + std::to_string(bev.channels) + " channels, fusion expects " +
                                    std::to_string(weights.in_channels));
    }
    BevFeature out(bev.nx, bev.ny, weights.out_channels);
    const std::size_t in = static_cast<std::size_t>(weights.in_channels);
    const std::size_t n_out = static_cast<std::size_t>(weights.out_channels);
    parallelFor(static_cast<std::size_t>(bev.nx * bev.ny), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t cell = begin; cell < end; ++cell) {
            const float *x = bev.data.data() + cell * in;
            float *y = out.data.data() + cell * n_out;
            for (std::size_t o = 0; o < n_out; ++o) {
                const float *row = weights.matrix.data() + o * in;
                float acc = weights.bias ? (*weights.bias)[o] : 0.0f;
                for (std::size_t c = 0; c < in; ++c) {
                    acc += row[c] * x[c];
                }
                y[o] = acc;
            }
        }
    });
    return out;
}

} // namespace fastray
