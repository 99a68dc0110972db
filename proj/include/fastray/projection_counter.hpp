// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0
//
// Process-wide tally of camera projections performed by the bulk transforms.
// Loops add their count once per call, so the hot paths stay untouched. The
// benchmark reads it to report projections per call for each method.

#pragma once

#include <atomic>
#include <cstdint>

namespace fastray {

inline std::atomic<std::uint64_t> &projectionCounter() {
    static std::atomic<std::uint64_t> counter{0};
    return counter;
}

inline void countProjections(std::uint64_t n) { projectionCounter().fetch_add(n, std::memory_order_relaxed); }

} // namespace fastray
