// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace fastray {

/// Thread count from FASTRAY_THREADS, or 1 when unset or malformed.
inline int defaultThreadCount() {
    if (const char *env = std::getenv("FASTRAY_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) {
                return n;
            }
        } catch (...) {
        }
    }
    return 1;
}

/// Splits [0, n) into `threads` contiguous chunks and calls fn(begin, end)
/// once per chunk. Chunks never overlap, so bodies with disjoint writes give
/// schedule-independent results.
template <typename Fn>
void parallelFor(std::size_t n, int threads, Fn &&fn) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = std::min(n, w * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    fn(std::size_t{0}, std::min(n, chunk));
}

} // namespace fastray
