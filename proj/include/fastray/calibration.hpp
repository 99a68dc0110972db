// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0
//
// Calibration / sequence JSON:
//
//   {
//     "version": 1,
//     "cameras": [{"name": ..., "width": W, "height": H,
//                  "intrinsics": {"fx", "fy", "cx", "cy"},
//                  "image_affine": [6, row-major 2x3]      (optional)
//                  "cam_from_ego": {"rotation": [9, row-major], "translation": [3]}}],
//     "frames":  [{"timestamp": t, "world_from_ego": {"rotation": [...], "translation": [...]}}]
//   }
//
// "frames" is optional. Rotations must be orthonormal within 1e-6.

#pragma once

#include "fastray/geometry.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastray {

inline constexpr int kCalibrationVersion = 1;
inline constexpr double kCalibrationRotationTolerance = 1e-6;

/// Schema or validation failure. what() starts with the JSON path of the
/// offending field, e.g. "cameras[2].cam_from_ego.rotation: ...".
class CalibrationError : public std::runtime_error {
  public:
    CalibrationError(const std::string &path, const std::string &detail)
        : std::runtime_error(path.empty() ? detail : path + ": " + detail), path_(path) {}
    const std::string &fieldPath() const { return path_; }

  private:
    std::string path_;
};

struct EgoFrame {
    double timestamp = 0.0;
    RigidTransform world_from_ego;
};

struct Calibration {
    CameraRig rig;
    std::vector<EgoFrame> frames;
};

Calibration parseCalibration(const std::string &json_text);
std::string calibrationToJson(const Calibration &calib);

/// Throws CalibrationError, including for a missing file (empty field path).
Calibration loadCalibration(const std::filesystem::path &path);
void saveCalibration(const std::filesystem::path &path, const Calibration &calib);

/// Cameras evenly spaced in yaw around the ego origin, looking outward with
/// the given horizontal field of view. `yaw_offset` is the first camera's yaw.
CameraRig makeSurroundRig(int n_cameras, double hfov, int width, int height, double mount_radius = 1.0,
                          double mount_height = 1.5, double yaw_offset = 0.0);

/// The 6-camera 1600x900 surround rig shipped as data/rigs/surround6.json.
CameraRig bundledSurroundRig();

/// Ego poses from the "frames" array of a calibration or sequence file. The
/// "cameras" array is not required here.
std::vector<EgoFrame> parsePoses(const std::string &json_text);
std::vector<EgoFrame> loadPoses(const std::filesystem::path &path);

/// Rig with intrinsics rescaled so each camera's image is width x height.
CameraRig resizeRig(const CameraRig &rig, int width, int height);

} // namespace fastray
