// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/bench.hpp"

#include "fastray/calibration.hpp"
#include "fastray/lut.hpp"
#include "fastray/projection_counter.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fastray {

void BenchConfig::validate() const {
    for (int d : {n_cameras, channels, feat_height, feat_width, bev_x, bev_y, bev_z, threads, depth_bins}) {
        if (d < 1) {
            throw std::invalid_argument("bench config '" + name + "': all dims and thread count must be >= 1");
        }
    }
    if (repetitions < 3) {
        throw std::invalid_argument("bench config '" + name + "': repetitions must be >= 3");
    }
    if (warmup < 0) {
        throw std::invalid_argument("bench config '" + name + "': warmup must be >= 0");
    }
    if (!(value_max >= value_min)) {
        throw std::invalid_argument("bench config '" + name + "': value range is empty");
    }
}

namespace {

// name, C, H, W, X=Y
struct SuiteRow {
    const char *name;
    int channels;
    int height;
    int width;
    int bev;
};

constexpr SuiteRow kSuite[] = {
    {"S1", 64, 16, 44, 128}, {"S2", 64, 32, 88, 128},   {"S3", 80, 32, 88, 160},
    {"S4", 96, 48, 132, 192}, {"S5", 128, 64, 176, 200}, {"S6", 128, 64, 176, 256},
};

} // namespace

BenchConfig benchSuite(const std::string &name) {
    std::string upper = name;
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    for (const auto &row : kSuite) {
        if (upper == row.name) {
            BenchConfig c;
            c.name = row.name;
            c.channels = row.channels;
            c.feat_height = row.height;
            c.feat_width = row.width;
            c.bev_x = row.bev;
            c.bev_y = row.bev;
            c.bev_z = 1;
            return c;
        }
    }
    throw std::invalid_argument("unknown bench suite '" + name + "' (expected s1..s6)");
}

std::vector<std::string> benchSuiteNames() {
    std::vector<std::string> names;
    for (const auto &row : kSuite) {
        names.emplace_back(row.name);
    }
    return names;
}

BenchConfig loadBenchConfig(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open bench config " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw std::runtime_error("bench config " + path.string() + ": " + e.what());
    }
    BenchConfig c;
    try {
        if (j.contains("suite")) {
            c = benchSuite(j.at("suite").get<std::string>());
        }
        c.name = j.value("name", c.name);
        c.n_cameras = j.value("n_cameras", c.n_cameras);
        c.channels = j.value("channels", c.channels);
        c.feat_height = j.value("feat_height", c.feat_height);
        c.feat_width = j.value("feat_width", c.feat_width);
        c.bev_x = j.value("bev_x", c.bev_x);
        c.bev_y = j.value("bev_y", c.bev_y);
        c.bev_z = j.value("bev_z", c.bev_z);
        c.repetitions = j.value("repetitions", c.repetitions);
        c.warmup = j.value("warmup", c.warmup);
        c.threads = j.value("threads", c.threads);
        c.depth_bins = j.value("depth_bins", c.depth_bins);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception &e) {
        throw std::runtime_error("bench config " + path.string() + ": " + e.what());
    }
    c.validate();
    return c;
}

FeatureStack synthFeatures(const BenchConfig &config, std::uint64_t seed) {
    config.validate();
    FeatureStack f(config.n_cameras, config.channels, config.feat_height, config.feat_width);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(config.value_min, config.value_max);
    for (auto &x : f.data) {
        x = std::clamp(dist(rng), config.value_min, config.value_max);
    }
    return f;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

TimingStats TimingStats::fromSamples(std::string method, std::vector<double> samples_ms) {
    if (samples_ms.empty()) {
        throw std::invalid_argument("timing needs at least one sample");
    }
    TimingStats s;
    s.method = std::move(method);
    std::vector<double> sorted = samples_ms;
    std::sort(sorted.begin(), sorted.end());
    s.sample_count = sorted.size();
    s.min_ms = sorted.front();
    s.median_ms = median(sorted);
    s.mean_ms = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    // Nearest-rank percentile.
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
    s.p95_ms = sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
    s.samples_ms = std::move(samples_ms);
    return s;
}

const TimingStats &BenchReport::method(const std::string &name) const {
    for (const auto &m : methods) {
        if (m.method == name) {
            return m;
        }
    }
    throw std::out_of_range("no timing for method '" + name + "'");
}

std::string environmentSummary() {
    std::ostringstream os;
#if defined(__clang__)
    os << "clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
    os << "gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#else
    os << "unknown compiler";
#endif
#ifdef NDEBUG
    os << "; optimized";
#else
    os << "; debug";
#endif
    os << "; hardware_threads=" << std::thread::hardware_concurrency();
    return os.str();
}

namespace {

template <typename Fn>
TimingStats timeMethod(const std::string &name, const BenchConfig &config, Fn &&fn) {
    for (int i = 0; i < config.warmup; ++i) {
        fn();
    }
    const std::uint64_t before = projectionCounter().load();
    fn();
    const std::uint64_t per_call = projectionCounter().load() - before;
    auto stats = TimingStats::fromSamples(name, timeCalls(config.repetitions, fn));
    stats.projections_per_call = per_call;
    return stats;
}

} // namespace

BenchReport runBenchmark(const BenchConfig &config, const CameraRig &rig, const VoxelGridSpec &grid) {
    config.validate();
    if (static_cast<int>(rig.size()) != config.n_cameras) {
        throw std::invalid_argument("bench config expects " + std::to_string(config.n_cameras) + " cameras, rig has " +
                                    std::to_string(rig.size()));
    }
    const CameraRig scaled = resizeRig(rig, config.feat_width, config.feat_height);
    VoxelGridSpec bev_grid = grid;
    bev_grid.x.cells = config.bev_x;
    bev_grid.y.cells = config.bev_y;
    bev_grid.z.cells = config.bev_z;
    bev_grid.validate();

    const FeatureStack features = synthFeatures(config, config.seed);
    std::vector<double> bins;
    for (int d = 0; d < config.depth_bins; ++d) {
        bins.push_back(1.0 + (d + 0.5) * (60.0 - 1.0) / config.depth_bins);
    }
    const DepthDistribution depth =
        DepthDistribution::uniform(config.n_cameras, bins, config.feat_height, config.feat_width);

    BenchReport report;
    report.config = config.name;
    report.threads = config.threads;
    report.environment = environmentSummary();

    std::optional<LookupTable> lut;
    const auto build_ms = timeCalls(1, [&] { lut.emplace(buildLut(scaled, bev_grid, config.threads)); });
    report.methods.push_back(TimingStats::fromSamples("lut_build", build_ms));
    report.methods.back().projections_per_call = bev_grid.voxelCount() * scaled.size();

    VoxelVolume fast_out;
    report.methods.push_back(timeMethod("fast_ray", config, [&] { fast_out = fastRayTransform(features, *lut, config.threads); }));
    VoxelVolume prealloc(bev_grid, config.channels);
    report.methods.push_back(timeMethod("fast_ray_prealloc", config,
                                        [&] { fastRayTransformInto(features, *lut, prealloc, config.threads); }));
    VoxelVolume naive_out;
    report.methods.push_back(timeMethod("naive", config, [&] {
        naive_out = naiveTransform(features, scaled, bev_grid, Aggregation::first_view, config.threads);
    }));
    VoxelVolume lss_out;
    report.methods.push_back(timeMethod("lss_reference", config, [&] {
        lss_out = lssReferenceTransform(features, depth, scaled, bev_grid, config.threads);
    }));
    report.outputs_match = fast_out.data == naive_out.data && prealloc.data == fast_out.data;
    return report;
}

namespace {

std::string formatNumber(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csvField(const std::string &s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

// RFC-4180 records; CRLF or LF line endings.
std::vector<std::vector<std::string>> parseCsv(const std::string &text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(cell));
            cell.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
                ++i;
            }
            if (any || !cell.empty()) {
                row.push_back(std::move(cell));
                rows.push_back(std::move(row));
            }
            row.clear();
            cell.clear();
            any = false;
        } else {
            cell += c;
            any = true;
        }
    }
    if (quoted) {
        throw std::runtime_error("CSV ends inside a quoted field");
    }
    if (any || !cell.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

const char *const kCsvHeader[] = {"schema_version", "config",    "method",  "threads",
                                  "samples",        "min_ms",    "median_ms", "mean_ms",
                                  "p95_ms",         "projections_per_call", "environment"};

template <typename T>
T parseNumber(const std::string &s) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("bad number '" + s + "' in CSV");
    }
    return v;
}

} // namespace

std::string reportToCsv(const BenchReport &report) {
    std::string out;
    for (std::size_t i = 0; i < std::size(kCsvHeader); ++i) {
        out += (i ? "," : "");
        out += kCsvHeader[i];
    }
    out += "\r\n";
    for (const auto &m : report.methods) {
        out += std::to_string(kCsvSchemaVersion) + "," + csvField(report.config) + "," + csvField(m.method) + "," +
               std::to_string(report.threads) + "," + std::to_string(m.sample_count) + "," + formatNumber(m.min_ms) + "," +
               formatNumber(m.median_ms) + "," + formatNumber(m.mean_ms) + "," + formatNumber(m.p95_ms) + "," +
               std::to_string(m.projections_per_call) + "," + csvField(report.environment) + "\r\n";
    }
    return out;
}

std::vector<TimingStats> parseCsvRows(const std::string &csv, std::vector<std::string> *configs,
                                      std::vector<int> *threads, std::vector<std::string> *envs) {
    const auto rows = parseCsv(csv);
    if (rows.empty() || rows[0].size() != std::size(kCsvHeader) ||
        !std::equal(rows[0].begin(), rows[0].end(), std::begin(kCsvHeader))) {
        throw std::runtime_error("CSV header does not match the bench report schema");
    }
    std::vector<TimingStats> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto &row = rows[r];
        if (row.size() == rows[0].size() && std::equal(row.begin(), row.end(), rows[0].begin())) {
            continue; // header repeated by a concatenated report
        }
        if (row.size() != std::size(kCsvHeader)) {
            throw std::runtime_error("CSV row " + std::to_string(r) + " has " + std::to_string(row.size()) + " fields");
        }
        if (parseNumber<int>(row[0]) != kCsvSchemaVersion) {
            throw std::runtime_error("unsupported CSV schema version " + row[0]);
        }
        TimingStats s;
        s.method = row[2];
        s.sample_count = parseNumber<std::size_t>(row[4]);
        s.min_ms = parseNumber<double>(row[5]);
        s.median_ms = parseNumber<double>(row[6]);
        s.mean_ms = parseNumber<double>(row[7]);
        s.p95_ms = parseNumber<double>(row[8]);
        s.projections_per_call = parseNumber<std::uint64_t>(row[9]);
        if (configs) {
            configs->push_back(row[1]);
        }
        if (threads) {
            threads->push_back(parseNumber<int>(row[3]));
        }
        if (envs) {
            envs->push_back(row[10]);
        }
        out.push_back(std::move(s));
    }
    return out;
}

BenchReport reportFromCsv(const std::string &csv) {
    std::vector<std::string> configs;
    std::vector<int> threads;
    std::vector<std::string> envs;
    BenchReport report;
    report.methods = parseCsvRows(csv, &configs, &threads, &envs);
    if (report.methods.empty()) {
        throw std::runtime_error("CSV has no data rows");
    }
    report.config = configs.front();
    report.threads = threads.front();
    report.environment = envs.front();
    for (std::size_t i = 1; i < configs.size(); ++i) {
        if (configs[i] != report.config || threads[i] != report.threads || envs[i] != report.environment) {
            throw std::runtime_error("CSV mixes several reports; use parseCsvRows");
        }
    }
    return report;
}

} // namespace fastray
