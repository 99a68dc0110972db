// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/format_error.hpp"

#include <fstream>
#include <iterator>

namespace fastray {

const char *toString(FormatErrc code) {
    switch (code) {
    case FormatErrc::bad_magic:
        return "bad magic";
    case FormatErrc::version_mismatch:
        return "version mismatch";
    case FormatErrc::truncated:
        return "truncated payload";
    case FormatErrc::out_of_bounds:
        return "entry out of declared bounds";
    case FormatErrc::unsupported_dtype:
        return "unsupported dtype";
    case FormatErrc::shape_mismatch:
        return "shape mismatch";
    case FormatErrc::io:
        return "i/o error";
    }
    return "unknown format error";
}

namespace detail {

std::vector<std::uint8_t> readFileBytes(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError(FormatErrc::io, "cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void writeFileBytes(const std::filesystem::path &path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError(FormatErrc::io, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw FormatError(FormatErrc::io, "write failed for " + path.string());
    }
}

} // namespace detail
} // namespace fastray
