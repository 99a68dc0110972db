// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/cli.hpp"

#include "fastray/bench.hpp"
#include "fastray/bevops.hpp"
#include "fastray/calibration.hpp"
#include "fastray/format_error.hpp"
#include "fastray/lut.hpp"
#include "fastray/parallel.hpp"
#include "fastray/temporal.hpp"
#include "fastray/tensor_io.hpp"
#include "fastray/validate.hpp"
#include "fastray/viewtrans.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace fastray {

namespace {

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) {
            return out;
        }
        start = pos + 1;
    }
}

template <typename T>
T parseNumber(const std::string &text, const std::string &what) {
    T value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw UsageError("invalid " + what + " '" + text + "'");
    }
    return value;
}

std::pair<int, int> parseSize(const std::string &text) {
    const auto parts = split(text, 'x');
    if (parts.size() != 2) {
        throw UsageError("expected WxH, got '" + text + "'");
    }
    return {parseNumber<int>(parts[0], "width"), parseNumber<int>(parts[1], "height")};
}

struct Common {
    std::string grid = "200x200x6";
    std::string range;
    int threads = defaultThreadCount();
};

void addGridOptions(CLI::App *cmd, Common &common) {
    cmd->add_option("--grid", common.grid, "Cell counts NXxNYxNZ")->capture_default_str();
    cmd->add_option("--range", common.range, "Metric range xmin,xmax,ymin,ymax,zmin,zmax");
}

void addThreads(CLI::App *cmd, Common &common) {
    cmd->add_option("--threads", common.threads, "Worker threads (default FASTRAY_THREADS or 1)")
        ->check(CLI::PositiveNumber);
}

CameraRig rigAtFeatureSize(const CameraRig &rig, std::int64_t width, std::int64_t height) {
    const auto &k = rig[0].intrinsics;
    if (k.width == width && k.height == height) {
        return rig;
    }
    return resizeRig(rig, static_cast<int>(width), static_cast<int>(height));
}

VoxelGridSpec gridWithCells(const VoxelGridSpec &range, std::int64_t nx, std::int64_t ny, std::int64_t nz) {
    VoxelGridSpec g = range;
    g.x.cells = nx;
    g.y.cells = ny;
    g.z.cells = nz;
    g.validate();
    return g;
}

// --- build-lut ---------------------------------------------------------------

struct BuildLutArgs {
    Common common;
    std::string calib;
    std::string out;
    std::string feature_size;
};

int buildLutCmd(const BuildLutArgs &a) {
    const Calibration calib = loadCalibration(a.calib);
    CameraRig rig = calib.rig;
    if (!a.feature_size.empty()) {
        const auto [w, h] = parseSize(a.feature_size);
        rig = resizeRig(rig, w, h);
    }
    const VoxelGridSpec grid = parseGridArg(a.common.grid, a.common.range);
    const LookupTable lut = buildLut(rig, grid, a.common.threads);
    writeLut(a.out, lut);
    std::cout << "wrote " << a.out << ": " << grid.nx() << "x" << grid.ny() << "x" << grid.nz() << ", "
              << rig.size() << " cameras, fill " << lut.fillFraction() << "\n";
    return kExitOk;
}

// --- transform ---------------------------------------------------------------

struct TransformArgs {
    Common common;
    std::string lut;
    std::string features;
    std::string out;
    std::string method = "fast";
    std::string calib;
    std::string depth;
    int depth_bins = 32;
    double depth_min = 1.0;
    double depth_max = 60.0;
    bool bev = false;
};

int transformCmd(const TransformArgs &a) {
    const FeatureStack features = featuresFromTensor(readTensor(a.features));
    VoxelVolume volume;
    if (a.method == "fast") {
        if (a.lut.empty()) {
            throw UsageError("--method fast needs --lut");
        }
        const VoxelGridSpec range = parseGridArg(a.common.grid, a.common.range);
        volume = fastRayTransform(features, readLut(a.lut, range), a.common.threads);
    } else {
        if (a.calib.empty()) {
            throw UsageError("--method " + a.method + " needs --calib");
        }
        const CameraRig rig = rigAtFeatureSize(loadCalibration(a.calib).rig, features.width, features.height);
        VoxelGridSpec grid = parseGridArg(a.common.grid, a.common.range);
        if (!a.lut.empty()) {
            // Take the cell counts from the table so both methods agree on the grid.
            const LookupTable lut = readLut(a.lut, grid);
            grid = lut.grid();
        }
        if (a.method == "naive") {
            volume = naiveTransform(features, rig, grid, Aggregation::first_view, a.common.threads);
        } else {
            DepthDistribution depth;
            if (!a.depth.empty()) {
                Tensor t = readTensor(a.depth);
                if (t.dims.size() != 4 || t.dims[0] != features.n_cameras || t.dims[2] != features.height ||
                    t.dims[3] != features.width) {
                    throw FormatError(FormatErrc::shape_mismatch, "depth tensor must be [N,D,H,W] matching features");
                }
                std::vector<double> bins;
                for (std::uint32_t d = 0; d < t.dims[1]; ++d) {
                    bins.push_back(a.depth_min + (d + 0.5) * (a.depth_max - a.depth_min) / t.dims[1]);
                }
                depth = DepthDistribution(features.n_cameras, bins, features.height, features.width);
                depth.weights = std::move(t.data);
            } else {
                std::vector<double> bins;
                for (int d = 0; d < a.depth_bins; ++d) {
                    bins.push_back(a.depth_min + (d + 0.5) * (a.depth_max - a.depth_min) / a.depth_bins);
                }
                depth = DepthDistribution::uniform(features.n_cameras, bins, features.height, features.width);
            }
            volume = lssReferenceTransform(features, depth, rig, grid, a.common.threads);
        }
    }
    if (a.bev) {
        writeTensor(a.out, toTensor(spaceToChannel(std::move(volume))));
    } else {
        writeTensor(a.out, toTensor(volume));
    }
    return kExitOk;
}

// --- bench -------------------------------------------------------------------

struct BenchArgs {
    Common common;
    std::string suite;
    std::string config;
    std::string csv;
    std::string calib;
    std::optional<int> repetitions;
    std::optional<int> warmup;
    bool threads_given = false;
};

int benchCmd(const BenchArgs &a) {
    if (a.suite.empty() == a.config.empty()) {
        throw UsageError("bench needs exactly one of --suite or --config");
    }
    BenchConfig config = a.suite.empty() ? loadBenchConfig(a.config) : benchSuite(a.suite);
    if (a.threads_given || a.config.empty()) {
        config.threads = a.common.threads;
    }
    if (a.repetitions) {
        config.repetitions = *a.repetitions;
    }
    if (a.warmup) {
        config.warmup = *a.warmup;
    }
    const CameraRig rig = a.calib.empty() ? bundledSurroundRig() : loadCalibration(a.calib).rig;
    config.n_cameras = static_cast<int>(rig.size());
    const VoxelGridSpec range = parseGridArg("1x1x1", a.common.range);
    const BenchReport report = runBenchmark(config, rig, range);
    const std::string csv = reportToCsv(report);
    std::ofstream out(a.csv, std::ios::binary | std::ios::trunc);
    if (!out || !(out << csv)) {
        throw FormatError(FormatErrc::io, "cannot write " + a.csv);
    }
    std::printf("%-20s %10s %10s %10s %10s %14s\n", "method", "min_ms", "median_ms", "mean_ms", "p95_ms",
                "proj/call");
    for (const auto &m : report.methods) {
        std::printf("%-20s %10.4f %10.4f %10.4f %10.4f %14llu\n", m.method.c_str(), m.min_ms, m.median_ms, m.mean_ms,
                    m.p95_ms, static_cast<unsigned long long>(m.projections_per_call));
    }
    const double fast = report.method("fast_ray").median_ms;
    std::printf("%s threads=%d naive/fast=%.1fx lss/fast=%.1fx outputs_match=%s\n", report.config.c_str(),
                report.threads, report.method("naive").median_ms / fast,
                report.method("lss_reference").median_ms / fast, report.outputs_match ? "yes" : "no");
    return report.outputs_match ? kExitOk : kExitValidationFailed;
}

// --- validate ----------------------------------------------------------------

struct ValidateArgs {
    Common common;
    std::string calib;
    std::uint64_t seed = 0;
    int stride = 16;
    int channels = 8;
};

int validateCmd(const ValidateArgs &a) {
    const Calibration calib = loadCalibration(a.calib);
    const CameraRig rig = a.stride == 1 ? calib.rig : scaleRig(calib.rig, a.stride);
    const VoxelGridSpec grid = parseGridArg(a.common.grid, a.common.range);
    const auto results = runValidation(rig, grid, a.seed, a.channels);
    bool ok = true;
    for (const auto &r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        ok = ok && r.passed;
    }
    return ok ? kExitOk : kExitValidationFailed;
}

// --- fuse --------------------------------------------------------------------

struct FuseArgs {
    Common common;
    std::vector<std::string> frames;
    std::string poses;
    std::string out;
    std::string mode = "bilinear";
};

BevFeature loadBev(const std::string &path) {
    Tensor t = readTensor(path);
    if (t.dims.size() == 4) {
        const VoxelGridSpec g = VoxelGridSpec::withCells(t.dims[0], t.dims[1], t.dims[2]);
        return spaceToChannel(volumeFromTensor(std::move(t), g));
    }
    return bevFromTensor(std::move(t));
}

int fuseCmd(const FuseArgs &a) {
    const auto poses = loadPoses(a.poses);
    if (poses.size() != a.frames.size()) {
        throw UsageError("--poses has " + std::to_string(poses.size()) + " frames, --frames lists " +
                         std::to_string(a.frames.size()));
    }
    const Interpolation mode = a.mode == "nearest" ? Interpolation::nearest : Interpolation::bilinear;
    const BevFeature current = loadBev(a.frames[0]);
    std::vector<FrameSample> history;
    for (std::size_t f = 1; f < a.frames.size(); ++f) {
        history.push_back({poses[f].timestamp, poses[f].world_from_ego, loadBev(a.frames[f])});
    }
    const VoxelGridSpec grid = gridWithCells(parseGridArg("1x1x1", a.common.range), current.nx, current.ny, 1);
    writeTensor(a.out, toTensor(fuseFrames(current, history, poses[0].world_from_ego, grid, mode)));
    return kExitOk;
}

} // namespace

VoxelGridSpec parseGridArg(const std::string &cells, const std::string &range) {
    const auto parts = split(cells, 'x');
    if (parts.size() != 3) {
        throw UsageError("expected grid NXxNYxNZ, got '" + cells + "'");
    }
    VoxelGridSpec g;
    g.x.cells = parseNumber<std::int64_t>(parts[0], "grid size");
    g.y.cells = parseNumber<std::int64_t>(parts[1], "grid size");
    g.z.cells = parseNumber<std::int64_t>(parts[2], "grid size");
    if (!range.empty()) {
        const auto r = split(range, ',');
        if (r.size() != 6) {
            throw UsageError("expected range xmin,xmax,ymin,ymax,zmin,zmax, got '" + range + "'");
        }
        g.x.min = parseNumber<double>(r[0], "range");
        g.x.max = parseNumber<double>(r[1], "range");
        g.y.min = parseNumber<double>(r[2], "range");
        g.y.max = parseNumber<double>(r[3], "range");
        g.z.min = parseNumber<double>(r[4], "range");
        g.z.max = parseNumber<double>(r[5], "range");
    }
    try {
        g.validate();
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    return g;
}

int runCli(int argc, const char *const *argv) {
    CLI::App app{"Fast-Ray camera-to-BEV view transform tools", "fastray"};
    app.require_subcommand(1);

    BuildLutArgs build;
    auto *build_cmd = app.add_subcommand("build-lut", "Precompute the voxel-to-pixel lookup table");
    build_cmd->add_option("--calib", build.calib, "Calibration JSON")->required();
    build_cmd->add_option("--out", build.out, "Output FBLT file")->required();
    build_cmd->add_option("--feature-size", build.feature_size, "Rescale cameras to a WxH feature map");
    addGridOptions(build_cmd, build.common);
    addThreads(build_cmd, build.common);

    TransformArgs tr;
    auto *tr_cmd = app.add_subcommand("transform", "Lift a feature stack into a voxel volume");
    tr_cmd->add_option("--features", tr.features, "FBTF features [N,C,H,W]")->required();
    tr_cmd->add_option("--out", tr.out, "Output FBTF volume [X,Y,Z,C]")->required();
    tr_cmd->add_option("--lut", tr.lut, "FBLT table (required for fast)");
    tr_cmd->add_option("--method", tr.method, "fast | naive | lss")
        ->check(CLI::IsMember({"fast", "naive", "lss"}))
        ->capture_default_str();
    tr_cmd->add_option("--calib", tr.calib, "Calibration JSON (naive, lss)");
    tr_cmd->add_option("--depth", tr.depth, "FBTF depth weights [N,D,H,W] (lss)");
    tr_cmd->add_option("--depth-bins", tr.depth_bins, "Uniform depth bins when --depth is absent (lss)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    tr_cmd->add_option("--depth-min", tr.depth_min, "Near edge of the depth bins")->capture_default_str();
    tr_cmd->add_option("--depth-max", tr.depth_max, "Far edge of the depth bins")->capture_default_str();
    tr_cmd->add_flag("--bev", tr.bev, "Write the flattened BEV [X,Y,Z*C] instead of the volume");
    addGridOptions(tr_cmd, tr.common);
    addThreads(tr_cmd, tr.common);

    BenchArgs bench;
    auto *bench_cmd = app.add_subcommand("bench", "Time the view transforms");
    bench_cmd->add_option("--suite", bench.suite, "Built-in config s1..s6");
    bench_cmd->add_option("--config", bench.config, "Bench config JSON");
    bench_cmd->add_option("--csv", bench.csv, "Output CSV report")->required();
    bench_cmd->add_option("--calib", bench.calib, "Calibration JSON (default: bundled surround rig)");
    bench_cmd->add_option("--range", bench.common.range, "Metric range xmin,xmax,ymin,ymax,zmin,zmax");
    bench_cmd->add_option("--repetitions", bench.repetitions, "Recorded calls per method");
    bench_cmd->add_option("--warmup", bench.warmup, "Discarded calls per method");
    auto *bench_threads = bench_cmd->add_option("--threads", bench.common.threads, "Worker threads")
                              ->check(CLI::PositiveNumber);

    ValidateArgs val;
    auto *val_cmd = app.add_subcommand("validate", "Run the oracle-equivalence suite on a rig");
    val_cmd->add_option("--calib", val.calib, "Calibration JSON")->required();
    val_cmd->add_option("--seed", val.seed, "Feature seed")->capture_default_str();
    val_cmd->add_option("--stride", val.stride, "Feature stride applied to the cameras")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    val_cmd->add_option("--channels", val.channels, "Feature channels")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    addGridOptions(val_cmd, val.common);

    FuseArgs fuse;
    auto *fuse_cmd = app.add_subcommand("fuse", "Align history BEV frames to the current one and concatenate");
    fuse_cmd->add_option("--frames", fuse.frames, "FBTF frames, current first then most recent history")
        ->required()
        ->expected(1, -1);
    fuse_cmd->add_option("--poses", fuse.poses, "JSON with one world_from_ego frame per --frames entry")
        ->required();
    fuse_cmd->add_option("--out", fuse.out, "Output FBTF BEV")->required();
    fuse_cmd->add_option("--mode", fuse.mode, "nearest | bilinear")
        ->check(CLI::IsMember({"nearest", "bilinear"}))
        ->capture_default_str();
    fuse_cmd->add_option("--range", fuse.common.range, "Metric range xmin,xmax,ymin,ymax,zmin,zmax");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (build_cmd->parsed()) {
            return buildLutCmd(build);
        }
        if (tr_cmd->parsed()) {
            return transformCmd(tr);
        }
        if (bench_cmd->parsed()) {
            bench.threads_given = bench_threads->count() > 0;
            return benchCmd(bench);
        }
        if (val_cmd->parsed()) {
            return validateCmd(val);
        }
        if (fuse_cmd->parsed()) {
            return fuseCmd(fuse);
        }
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

} // namespace fastray
