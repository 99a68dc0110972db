// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0
//
// Pinhole cameras, rigid transforms and the voxel grid frame.
//
// Frames: ego is x forward, y left, z up. Camera frames follow the optical
// convention (x right, y down, z forward). Extrinsics are stored as
// cam_from_ego.

#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fastray {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Tolerance on R^T R = I and det(R) = 1 for a RigidTransform.
inline constexpr double kRotationTolerance = 1e-9;

class RigidTransform {
  public:
    RigidTransform() = default;

    /// Throws std::invalid_argument unless `rotation` is a proper rotation
    /// within kRotationTolerance.
    RigidTransform(const Mat3 &rotation, const Vec3 &translation);

    /// Accepts a rotation that is orthonormal within `tolerance` and snaps it
    /// to the nearest proper rotation. Used for values read from text files.
    static RigidTransform fromApproximate(const Mat3 &rotation, const Vec3 &translation,
                                          double tolerance);

    static RigidTransform identity() { return {}; }
    static RigidTransform translation(const Vec3 &t) { return {Mat3::Identity(), t}; }
    /// Rotation about +z by `yaw` radians followed by translation `t`.
    static RigidTransform fromYaw(double yaw, const Vec3 &t = Vec3::Zero());
    static RigidTransform fromMatrix(const Mat4 &m);

    const Mat3 &rotation() const { return rotation_; }
    const Vec3 &translation() const { return translation_; }

    Vec3 operator()(const Vec3 &p) const { return rotation_ * p + translation_; }

    RigidTransform inverse() const;
    Mat4 matrix() const;

    /// (a * b)(p) == a(b(p))
    friend RigidTransform operator*(const RigidTransform &a, const RigidTransform &b);

    bool operator==(const RigidTransform &other) const {
        return rotation_ == other.rotation_ && translation_ == other.translation_;
    }

  private:
    Mat3 rotation_ = Mat3::Identity();
    Vec3 translation_ = Vec3::Zero();
};

inline RigidTransform compose(const RigidTransform &a, const RigidTransform &b) { return a * b; }

/// Returns the reason a matrix is not a proper rotation within `tolerance`,
/// or an empty optional when it is one.
std::optional<std::string> rotationDefect(const Mat3 &r, double tolerance);

/// Pinhole intrinsics. `image_affine` is a 2D affine map applied to pixel
/// coordinates after the pinhole projection; it is the identity for a raw
/// camera and carries image-space augmentation (flip, crop, resize, rotate).
struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;
    Mat3 image_affine = Mat3::Identity();

    /// Throws std::invalid_argument on fx/fy <= 0, empty image or a
    /// non-affine / singular `image_affine`.
    void validate() const;

    /// 3x3 matrix mapping camera-frame rays to homogeneous pixels.
    Mat3 matrix() const;

    bool operator==(const CameraIntrinsics &) const = default;
};

struct Camera {
    std::string name;
    CameraIntrinsics intrinsics;
    RigidTransform cam_from_ego;
};

/// Ordered set of cameras. Order matters: overlap ties go to the lower index.
class CameraRig {
  public:
    CameraRig() = default;
    /// Throws std::invalid_argument on duplicate names or invalid intrinsics.
    explicit CameraRig(std::vector<Camera> cameras);

    std::size_t size() const { return cameras_.size(); }
    bool empty() const { return cameras_.empty(); }
    const Camera &operator[](std::size_t i) const { return cameras_[i]; }
    const std::vector<Camera> &cameras() const { return cameras_; }

    auto begin() const { return cameras_.begin(); }
    auto end() const { return cameras_.end(); }

  private:
    std::vector<Camera> cameras_;
};

struct AxisRange {
    double min = 0.0;
    double max = 1.0;
    std::int64_t cells = 1;

    double pitch() const { return (max - min) / static_cast<double>(cells); }
    double center(std::int64_t i) const { return min + (static_cast<double>(i) + 0.5) * pitch(); }
    bool operator==(const AxisRange &) const = default;
};

/// Axis-aligned voxel grid over half-open metric intervals.
struct VoxelGridSpec {
    AxisRange x{-50.0, 50.0, 200};
    AxisRange y{-50.0, 50.0, 200};
    AxisRange z{-5.0, 3.0, 6};

    /// Default metric range with the given cell counts.
    static VoxelGridSpec withCells(std::int64_t nx, std::int64_t ny, std::int64_t nz);

    void validate() const;

    std::int64_t nx() const { return x.cells; }
    std::int64_t ny() const { return y.cells; }
    std::int64_t nz() const { return z.cells; }
    std::size_t voxelCount() const { return static_cast<std::size_t>(nx() * ny() * nz()); }

    /// Flat index with x outermost and z innermost.
    std::size_t offset(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return static_cast<std::size_t>((i * ny() + j) * nz() + k);
    }

    bool operator==(const VoxelGridSpec &) const = default;
};

/// Metric center of cell (i,j,k). Throws std::out_of_range for a bad index.
Vec3 voxelCenter(const VoxelGridSpec &grid, std::int64_t i, std::int64_t j, std::int64_t k);

struct PixelProjection {
    double u;
    double v;
    double depth;
};

/// Projects an ego-frame point. Returns nullopt when the point is not strictly
/// in front of the camera. No image-bounds check is made.
std::optional<PixelProjection> projectPoint(const Vec3 &p_ego, const CameraIntrinsics &cam,
                                            const RigidTransform &cam_from_ego);

/// Inverse of projectPoint for a known depth (camera-frame z).
Vec3 unprojectPixel(double u, double v, double depth, const CameraIntrinsics &cam,
                    const RigidTransform &cam_from_ego);

/// Copy of `rig` with intrinsics resampled for features at 1/stride
/// resolution: fx, fy, cx, cy divided by stride, width/height floor-divided.
CameraRig scaleRig(const CameraRig &rig, int stride);

} // namespace fastray
