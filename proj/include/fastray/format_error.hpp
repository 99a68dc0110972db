// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastray {

enum class FormatErrc {
    bad_magic,
    version_mismatch,
    truncated,
    out_of_bounds,
    unsupported_dtype,
    shape_mismatch,
    io,
};

const char *toString(FormatErrc code);

/// Raised for malformed FBLT/FBTF input or file I/O failures.
class FormatError : public std::runtime_error {
  public:
    FormatError(FormatErrc code, const std::string &detail)
        : std::runtime_error(std::string(toString(code)) + (detail.empty() ? "" : ": " + detail)),
          code_(code) {}

    FormatErrc code() const { return code_; }

  private:
    FormatErrc code_;
};

namespace detail {

inline void putU32(std::vector<std::uint8_t> &out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
    }
}

inline void putI32(std::vector<std::uint8_t> &out, std::int32_t v) { putU32(out, static_cast<std::uint32_t>(v)); }

inline void putF32(std::vector<std::uint8_t> &out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    putU32(out, bits);
}

inline std::uint32_t getU32(std::span<const std::uint8_t> in, std::size_t at) {
    return static_cast<std::uint32_t>(in[at]) | (static_cast<std::uint32_t>(in[at + 1]) << 8) |
           (static_cast<std::uint32_t>(in[at + 2]) << 16) | (static_cast<std::uint32_t>(in[at + 3]) << 24);
}

inline std::int32_t getI32(std::span<const std::uint8_t> in, std::size_t at) {
    return static_cast<std::int32_t>(getU32(in, at));
}

inline float getF32(std::span<const std::uint8_t> in, std::size_t at) {
    const std::uint32_t bits = getU32(in, at);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
}

std::vector<std::uint8_t> readFileBytes(const std::filesystem::path &path);
void writeFileBytes(const std::filesystem::path &path, std::span<const std::uint8_t> bytes);

} // namespace detail
} // namespace fastray
