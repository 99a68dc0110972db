// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0
//
// Calibration-consistent augmentation. Image-space augmentations are folded
// into the intrinsics; BEV-space augmentations move the cameras and the
// ground-truth boxes together, so features built from the augmented rig line
// up with the augmented boxes. No pixels are resampled here.

#pragma once

#include "fastray/geometry.hpp"

#include <utility>
#include <vector>

namespace fastray {

/// 2D affine map on pixel coordinates plus the resulting image size.
class ImageAug {
  public:
    static ImageAug identity(int width, int height);
    /// u' = (W - 1) - u.
    static ImageAug flipHorizontal(int width, int height);
    /// Keeps the window [x0, x0 + w) x [y0, y0 + h).
    static ImageAug crop(int x0, int y0, int w, int h);
    /// Scales pixel coordinates by `scale`; new size is floor(size * scale).
    static ImageAug resize(double scale, int width, int height);
    /// Rotation by `angle` radians about the image center ((W-1)/2, (H-1)/2).
    static ImageAug rotate(double angle, int width, int height);

    /// `next` applied after this augmentation.
    ImageAug then(const ImageAug &next) const;

    const Mat3 &matrix() const { return matrix_; }
    int width() const { return width_; }
    int height() const { return height_; }

  private:
    ImageAug(const Mat3 &m, int width, int height);

    Mat3 matrix_ = Mat3::Identity();
    int width_ = 1;
    int height_ = 1;
};

/// Intrinsics whose projections equal the augmentation applied to the
/// original projections. Throws std::invalid_argument if the map is singular.
CameraIntrinsics applyImageAug(const ImageAug &aug, const CameraIntrinsics &k);

/// Ego-frame map p -> scale * Q * p with Q orthogonal and keeping the z axis.
class BevAug {
  public:
    static BevAug identity();
    /// Mirror across the ego x axis: y -> -y.
    static BevAug flipX();
    /// Mirror across the ego y axis: x -> -x.
    static BevAug flipY();
    static BevAug rotateYaw(double angle);
    static BevAug scale(double factor);

    /// `next` applied after this augmentation.
    BevAug then(const BevAug &next) const;

    const Mat3 &orthogonal() const { return orthogonal_; }
    double scaleFactor() const { return scale_; }
    Mat3 linear() const { return scale_ * orthogonal_; }
    Vec3 operator()(const Vec3 &p) const { return scale_ * (orthogonal_ * p); }
    bool isMirror() const;

  private:
    BevAug(const Mat3 &q, double s);

    Mat3 orthogonal_ = Mat3::Identity();
    double scale_ = 1.0;
};

/// Wraps an angle into (-pi, pi].
double normalizeYaw(double angle);

struct Box3D {
    Vec3 center = Vec3::Zero();
    Vec3 size = Vec3::Ones(); // w, h, l
    double yaw = 0.0;
    double vx = 0.0;
    double vy = 0.0;

    void validate() const;
};

/// Cameras see the augmented world: for every ego point P, projecting aug(P)
/// through the returned rig gives the pixel P had in `rig`. Boxes move with
/// the world: centers mapped, sizes scaled, yaw and velocity rotated/mirrored.
std::pair<CameraRig, std::vector<Box3D>> applyBevAug(const BevAug &aug, const CameraRig &rig,
                                                     const std::vector<Box3D> &boxes);

} // namespace fastray
