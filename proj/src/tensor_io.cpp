// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/tensor_io.hpp"

#include <functional>
#include <numeric>
#include <string>

namespace fastray {

std::size_t Tensor::elementCount() const {
    if (dims.empty()) {
        return 0;
    }
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           [](std::size_t a, std::uint32_t b) { return a * b; });
}

std::vector<std::uint8_t> serializeTensor(const Tensor &t) {
    if (t.dims.empty() || t.dims.size() > 255) {
        throw FormatError(FormatErrc::shape_mismatch, "tensor rank must be in [1, 255]");
    }
    if (t.data.size() != t.elementCount()) {
        throw FormatError(FormatErrc::shape_mismatch, "data length does not match dims");
    }
    std::vector<std::uint8_t> out;
    out.reserve(10 + 4 * t.dims.size() + 4 * t.data.size());
    for (const char c : {'F', 'B', 'T', 'F'}) {
        out.push_back(static_cast<std::uint8_t>(c));
    }
    detail::putU32(out, kTensorFormatVersion);
    out.push_back(0); // f32
    out.push_back(static_cast<std::uint8_t>(t.dims.size()));
    for (std::uint32_t d : t.dims) {
        detail::putU32(out, d);
    }
    for (float x : t.data) {
        detail::putF32(out, x);
    }
    return out;
}

Tensor deserializeTensor(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || bytes[0] != 'F' || bytes[1] != 'B' || bytes[2] != 'T' || bytes[3] != 'F') {
        throw FormatError(FormatErrc::bad_magic, "expected FBTF");
    }
    if (bytes.size() < 10) {
        throw FormatError(FormatErrc::truncated, "header is shorter than 10 bytes");
    }
    const std::uint32_t version = detail::getU32(bytes, 4);
    if (version != kTensorFormatVersion) {
        throw FormatError(FormatErrc::version_mismatch, "got version " + std::to_string(version));
    }
    if (bytes[8] != 0) {
        throw FormatError(FormatErrc::unsupported_dtype, "dtype code " + std::to_string(bytes[8]));
    }
    const std::size_t ndim = bytes[9];
    if (ndim == 0) {
        throw FormatError(FormatErrc::shape_mismatch, "rank 0 tensors are not supported");
    }
    const std::size_t header = 10 + 4 * ndim;
    if (bytes.size() < header) {
        throw FormatError(FormatErrc::truncated, "dims are cut short");
    }
    Tensor t;
    for (std::size_t d = 0; d < ndim; ++d) {
        t.dims.push_back(detail::getU32(bytes, 10 + 4 * d));
    }
    const std::size_t count = t.elementCount();
    if ((bytes.size() - header) / 4 < count) {
        throw FormatError(FormatErrc::truncated, "expected " + std::to_string(count) + " elements");
    }
    if (bytes.size() - header != 4 * count) {
        throw FormatError(FormatErrc::shape_mismatch, "trailing bytes after tensor data");
    }
    t.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        t.data[i] = detail::getF32(bytes, header + 4 * i);
    }
    return t;
}

void writeTensor(const std::filesystem::path &path, const Tensor &t) {
    detail::writeFileBytes(path, serializeTensor(t));
}

Tensor readTensor(const std::filesystem::path &path) { return deserializeTensor(detail::readFileBytes(path)); }

namespace {

std::uint32_t dim(std::int64_t d) { return static_cast<std::uint32_t>(d); }

void expectRank(const Tensor &t, std::size_t rank, const char *what) {
    if (t.dims.size() != rank) {
        throw FormatError(FormatErrc::shape_mismatch, std::string(what) + " tensor must have rank " + std::to_string(rank) +
                                                          ", got " + std::to_string(t.dims.size()));
    }
    for (auto d : t.dims) {
        if (d == 0) {
            throw FormatError(FormatErrc::shape_mismatch, std::string(what) + " tensor has an empty dimension");
        }
    }
}

} // namespace

Tensor toTensor(const FeatureStack &f) {
    return {{dim(f.n_cameras), dim(f.channels), dim(f.height), dim(f.width)}, f.data};
}

Tensor toTensor(const VoxelVolume &v) {
    return {{dim(v.grid.nx()), dim(v.grid.ny()), dim(v.grid.nz()), dim(v.channels)}, v.data};
}

Tensor toTensor(const BevFeature &b) { return {{dim(b.nx), dim(b.ny), dim(b.channels)}, b.data}; }

FeatureStack featuresFromTensor(Tensor t) {
    expectRank(t, 4, "feature");
    FeatureStack f;
    f.n_cameras = t.dims[0];
    f.channels = t.dims[1];
    f.height = t.dims[2];
    f.width = t.dims[3];
    f.data = std::move(t.data);
    return f;
}

BevFeature bevFromTensor(Tensor t) {
    expectRank(t, 3, "BEV");
    BevFeature b;
    b.nx = t.dims[0];
    b.ny = t.dims[1];
    b.channels = t.dims[2];
    b.data = std::move(t.data);
    return b;
}

VoxelVolume volumeFromTensor(Tensor t, const VoxelGridSpec &grid) {
    expectRank(t, 4, "volume");
    if (t.dims[0] != grid.nx() || t.dims[1] != grid.ny() || t.dims[2] != grid.nz()) {
        throw FormatError(FormatErrc::shape_mismatch, "volume dims do not match grid");
    }
    VoxelVolume v;
    v.grid = grid;
    v.channels = t.dims[3];
    v.data = std::move(t.data);
    return v;
}

FusionWeights fusionWeightsFromTensors(const Tensor &matrix, const Tensor *bias) {
    expectRank(matrix, 2, "fusion matrix");
    FusionWeights w{matrix.dims[1], matrix.dims[0], matrix.data, {}};
    if (bias) {
        expectRank(*bias, 1, "fusion bias");
        if (bias->dims[0] != matrix.dims[0]) {
            throw FormatError(FormatErrc::shape_mismatch, "fusion bias length does not match matrix rows");
        }
        w.bias = bias->data;
    }
    return w;
}

} // namespace fastray
