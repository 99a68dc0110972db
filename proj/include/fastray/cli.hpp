// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0
//
// `fastray` command line. Exit codes: 0 success, 1 a validation property
// failed, 2 usage or I/O error.

#pragma once

#include "fastray/geometry.hpp"

#include <string>

namespace fastray {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitUsage = 2;

int runCli(int argc, const char *const *argv);

/// "200x200x6" -> cell counts on the default range.
VoxelGridSpec parseGridArg(const std::string &cells, const std::string &range = "");

} // namespace fastray
