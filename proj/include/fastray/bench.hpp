// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0
//
// Latency harness for the view transforms. Every method consumes the same
// feature stack; the table is built once and timed on its own.
//
// CSV report columns (schema version 1, fixed order):
//   schema_version,config,method,threads,samples,min_ms,median_ms,mean_ms,
//   p95_ms,projections_per_call,environment
// Methods: lut_build, fast_ray, fast_ray_prealloc, naive, lss_reference.
// fast_ray includes output allocation; fast_ray_prealloc writes into a
// volume allocated once outside the timed region.

#pragma once

#include "fastray/geometry.hpp"
#include "fastray/viewtrans.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fastray {

struct BenchConfig {
    std::string name = "custom";
    int n_cameras = 6;
    int channels = 64;
    int feat_height = 16;
    int feat_width = 44;
    int bev_x = 128;
    int bev_y = 128;
    int bev_z = 1;
    int repetitions = 10;
    int warmup = 2;
    int threads = 1;
    int depth_bins = 32;
    std::uint64_t seed = 0;
    float value_min = -1.0f;
    float value_max = 1.0f;

    /// Throws std::invalid_argument when a dim is < 1 or repetitions < 3.
    void validate() const;
};

/// Built-in suite "s1" .. "s6" (case-insensitive); throws on other names.
BenchConfig benchSuite(const std::string &name);
std::vector<std::string> benchSuiteNames();

/// Reads a config JSON object; missing keys keep BenchConfig defaults.
BenchConfig loadBenchConfig(const std::filesystem::path &path);

/// Uniform values in [value_min, value_max] from a 64-bit Mersenne Twister;
/// shape (n_cameras, channels, feat_height, feat_width).
FeatureStack synthFeatures(const BenchConfig &config, std::uint64_t seed);

struct TimingStats {
    std::string method;
    std::vector<double> samples_ms;
    std::size_t sample_count = 0;
    double min_ms = 0.0;
    double median_ms = 0.0;
    double mean_ms = 0.0;
    double p95_ms = 0.0;
    std::uint64_t projections_per_call = 0;

    static TimingStats fromSamples(std::string method, std::vector<double> samples_ms);
};

struct BenchReport {
    std::string config;
    int threads = 1;
    std::string environment;
    std::vector<TimingStats> methods;
    /// fast_ray and naive volumes were element-equal.
    bool outputs_match = false;

    const TimingStats &method(const std::string &name) const;
    double lutBuildMs() const { return method("lut_build").median_ms; }
};

inline constexpr int kCsvSchemaVersion = 1;

/// Times every method on identical inputs. `rig` is rescaled to the feature
/// size and `grid` keeps its metric range with cell counts from the config.
BenchReport runBenchmark(const BenchConfig &config, const CameraRig &rig, const VoxelGridSpec &grid);

std::string reportToCsv(const BenchReport &report);
/// Parses rows written by reportToCsv (one or more reports).
std::vector<TimingStats> parseCsvRows(const std::string &csv, std::vector<std::string> *configs = nullptr,
                                      std::vector<int> *threads = nullptr, std::vector<std::string> *envs = nullptr);
/// Inverse of reportToCsv for a single report.
BenchReport reportFromCsv(const std::string &csv);

std::string environmentSummary();

/// Wall time in milliseconds of each of `n` calls to fn.
template <typename Fn>
std::vector<double> timeCalls(int n, Fn &&fn) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        out.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return out;
}

/// Median of a copy of `values`.
double median(std::vector<double> values);

} // namespace fastray
