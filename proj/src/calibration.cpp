// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/calibration.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fastray {

using nlohmann::json;

namespace {

const json &field(const json &obj, const std::string &key, const std::string &path) {
    if (!obj.is_object()) {
        throw CalibrationError(path, "expected an object");
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw CalibrationError(path + "." + key, "missing required field");
    }
    return *it;
}

double number(const json &j, const std::string &path) {
    if (!j.is_number()) {
        throw CalibrationError(path, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw CalibrationError(path, "expected a finite number");
    }
    return v;
}

int integer(const json &j, const std::string &path) {
    if (!j.is_number_integer()) {
        throw CalibrationError(path, "expected an integer");
    }
    return j.get<int>();
}

std::vector<double> numbers(const json &j, std::size_t n, const std::string &path) {
    if (!j.is_array() || j.size() != n) {
        throw CalibrationError(path, "expected an array of " + std::to_string(n) + " numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

RigidTransform parseTransform(const json &j, const std::string &path, const std::string &owner = "") {
    const auto r = numbers(field(j, "rotation", path), 9, path + ".rotation");
    const auto t = numbers(field(j, "translation", path), 3, path + ".translation");
    Mat3 rot;
    rot << r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8];
    try {
        return RigidTransform::fromApproximate(rot, Vec3(t[0], t[1], t[2]), kCalibrationRotationTolerance);
    } catch (const std::invalid_argument &e) {
        throw CalibrationError(path + ".rotation", owner + e.what());
    }
}

json transformJson(const RigidTransform &t) {
    const Mat3 &r = t.rotation();
    return {{"rotation", {r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2), r(2, 0), r(2, 1), r(2, 2)}},
            {"translation", {t.translation().x(), t.translation().y(), t.translation().z()}}};
}

std::vector<EgoFrame> parseFrames(const json &root) {
    std::vector<EgoFrame> frames;
    const auto it = root.find("frames");
    if (it == root.end()) {
        return frames;
    }
    if (!it->is_array()) {
        throw CalibrationError("frames", "expected an array");
    }
    for (std::size_t f = 0; f < it->size(); ++f) {
        const std::string path = "frames[" + std::to_string(f) + "]";
        const json &fj = (*it)[f];
        frames.push_back({number(field(fj, "timestamp", path), path + ".timestamp"),
                          parseTransform(field(fj, "world_from_ego", path), path + ".world_from_ego")});
    }
    return frames;
}

} // namespace

Calibration parseCalibration(const std::string &json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw CalibrationError("", std::string("invalid JSON: ") + e.what());
    }
    const int version = integer(field(root, "version", ""), "version");
    if (version != kCalibrationVersion) {
        throw CalibrationError("version", "unsupported schema version " + std::to_string(version));
    }
    const json &cams = field(root, "cameras", "");
    if (!cams.is_array() || cams.empty()) {
        throw CalibrationError("cameras", "expected a non-empty array");
    }
    std::vector<Camera> cameras;
    for (std::size_t c = 0; c < cams.size(); ++c) {
        const std::string path = "cameras[" + std::to_string(c) + "]";
        const json &cj = cams[c];
        Camera cam;
        const json &name = field(cj, "name", path);
        if (!name.is_string() || name.get<std::string>().empty()) {
            throw CalibrationError(path + ".name", "expected a non-empty string");
        }
        cam.name = name.get<std::string>();
        cam.intrinsics.width = integer(field(cj, "width", path), path + ".width");
        cam.intrinsics.height = integer(field(cj, "height", path), path + ".height");
        const json &k = field(cj, "intrinsics", path);
        cam.intrinsics.fx = number(field(k, "fx", path + ".intrinsics"), path + ".intrinsics.fx");
        cam.intrinsics.fy = number(field(k, "fy", path + ".intrinsics"), path + ".intrinsics.fy");
        cam.intrinsics.cx = number(field(k, "cx", path + ".intrinsics"), path + ".intrinsics.cx");
        cam.intrinsics.cy = number(field(k, "cy", path + ".intrinsics"), path + ".intrinsics.cy");
        if (const auto it = cj.find("image_affine"); it != cj.end()) {
            const auto a = numbers(*it, 6, path + ".image_affine");
            cam.intrinsics.image_affine << a[0], a[1], a[2], a[3], a[4], a[5], 0.0, 0.0, 1.0;
        }
        try {
            cam.intrinsics.validate();
        } catch (const std::invalid_argument &e) {
            throw CalibrationError(path, "camera '" + cam.name + "': " + e.what());
        }
        cam.cam_from_ego =
            parseTransform(field(cj, "cam_from_ego", path), path + ".cam_from_ego", "camera '" + cam.name + "': ");
        cameras.push_back(std::move(cam));
    }

    Calibration calib;
    try {
        calib.rig = CameraRig(std::move(cameras));
    } catch (const std::invalid_argument &e) {
        throw CalibrationError("cameras", e.what());
    }
    calib.frames = parseFrames(root);
    return calib;
}

std::vector<EgoFrame> parsePoses(const std::string &json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw CalibrationError("", std::string("invalid JSON: ") + e.what());
    }
    const int version = integer(field(root, "version", ""), "version");
    if (version != kCalibrationVersion) {
        throw CalibrationError("version", "unsupported schema version " + std::to_string(version));
    }
    field(root, "frames", "");
    return parseFrames(root);
}

std::vector<EgoFrame> loadPoses(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw CalibrationError("", "cannot open pose file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parsePoses(ss.str());
}

std::string calibrationToJson(const Calibration &calib) {
    json cams = json::array();
    for (const auto &cam : calib.rig) {
        const auto &k = cam.intrinsics;
        json cj = {{"name", cam.name},
                   {"width", k.width},
                   {"height", k.height},
                   {"intrinsics", {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}}},
                   {"cam_from_ego", transformJson(cam.cam_from_ego)}};
        if (!k.image_affine.isIdentity(0.0)) {
            const auto &a = k.image_affine;
            cj["image_affine"] = {a(0, 0), a(0, 1), a(0, 2), a(1, 0), a(1, 1), a(1, 2)};
        }
        cams.push_back(std::move(cj));
    }
    json frames = json::array();
    for (const auto &f : calib.frames) {
        frames.push_back({{"timestamp", f.timestamp}, {"world_from_ego", transformJson(f.world_from_ego)}});
    }
    json root = {{"version", kCalibrationVersion}, {"cameras", std::move(cams)}};
    if (!calib.frames.empty()) {
        root["frames"] = std::move(frames);
    }
    return root.dump(2) + "\n";
}

Calibration loadCalibration(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw CalibrationError("", "cannot open calibration file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parseCalibration(ss.str());
}

void saveCalibration(const std::filesystem::path &path, const Calibration &calib) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw CalibrationError("", "cannot write calibration file " + path.string());
    }
    out << calibrationToJson(calib);
}

CameraRig makeSurroundRig(int n_cameras, double hfov, int width, int height, double mount_radius,
                          double mount_height, double yaw_offset) {
    if (n_cameras < 1) {
        throw std::invalid_argument("surround rig needs at least one camera");
    }
    const double focal = 0.5 * width / std::tan(0.5 * hfov);
    std::vector<Camera> cams;
    for (int c = 0; c < n_cameras; ++c) {
        const double yaw = yaw_offset + 2.0 * std::numbers::pi * c / n_cameras;
        const double cs = std::cos(yaw);
        const double sn = std::sin(yaw);
        Mat3 r;
        r << sn, -cs, 0.0, // image right
            0.0, 0.0, -1.0, // image down
            cs, sn, 0.0;    // optical axis
        const Vec3 position(mount_radius * cs, mount_radius * sn, mount_height);
        Camera cam;
        cam.name = "cam" + std::to_string(c);
        cam.intrinsics = {focal, focal, 0.5 * width, 0.5 * height, width, height};
        cam.cam_from_ego = RigidTransform::fromApproximate(r, -(r * position), 1e-12);
        cams.push_back(std::move(cam));
    }
    return CameraRig(std::move(cams));
}

CameraRig bundledSurroundRig() {
    const CameraRig base = makeSurroundRig(6, 70.0 * std::numbers::pi / 180.0, 1600, 900);
    const char *names[] = {"CAM_FRONT", "CAM_FRONT_LEFT", "CAM_BACK_LEFT", "CAM_BACK", "CAM_BACK_RIGHT", "CAM_FRONT_RIGHT"};
    std::vector<Camera> cams(base.cameras());
    for (std::size_t c = 0; c < cams.size(); ++c) {
        cams[c].name = names[c];
    }
    return CameraRig(std::move(cams));
}

CameraRig resizeRig(const CameraRig &rig, int width, int height) {
    std::vector<Camera> cams(rig.cameras());
    for (auto &cam : cams) {
        auto &k = cam.intrinsics;
        const double sx = static_cast<double>(width) / k.width;
        const double sy = static_cast<double>(height) / k.height;
        if (!k.image_affine.isIdentity(0.0)) {
            throw std::invalid_argument("resizeRig expects raw intrinsics without an image affine");
        }
        k.fx *= sx;
        k.cx *= sx;
        k.fy *= sy;
        k.cy *= sy;
        k.width = width;
        k.height = height;
    }
    return CameraRig(std::move(cams));
}

} // namespace fastray
