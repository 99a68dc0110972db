// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/augment.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fastray {

ImageAug::ImageAug(const Mat3 &m, int width, int height) : matrix_(m), width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("augmented image must be at least 1x1");
    }
}

ImageAug ImageAug::identity(int width, int height) { return {Mat3::Identity(), width, height}; }

ImageAug ImageAug::flipHorizontal(int width, int height) {
    Mat3 m = Mat3::Identity();
    m(0, 0) = -1.0;
    m(0, 2) = static_cast<double>(width - 1);
    return {m, width, height};
}

ImageAug ImageAug::crop(int x0, int y0, int w, int h) {
    Mat3 m = Mat3::Identity();
    m(0, 2) = -static_cast<double>(x0);
    m(1, 2) = -static_cast<double>(y0);
    return {m, w, h};
}

ImageAug ImageAug::resize(double scale, int width, int height) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw std::invalid_argument("resize scale must be positive");
    }
    Mat3 m = Mat3::Identity();
    m(0, 0) = scale;
    m(1, 1) = scale;
    return {m, static_cast<int>(std::floor(width * scale)), static_cast<int>(std::floor(height * scale))};
}

ImageAug ImageAug::rotate(double angle, int width, int height) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double ox = 0.5 * (width - 1);
    const double oy = 0.5 * (height - 1);
    Mat3 m;
    m << c, -s, ox - c * ox + s * oy, s, c, oy - s * ox - c * oy, 0.0, 0.0, 1.0;
    return {m, width, height};
}

ImageAug ImageAug::then(const ImageAug &next) const { return {next.matrix_ * matrix_, next.width_, next.height_}; }

CameraIntrinsics applyImageAug(const ImageAug &aug, const CameraIntrinsics &k) {
    if (aug.matrix().topLeftCorner<2, 2>().determinant() == 0.0) {
        throw std::invalid_argument("image augmentation is not invertible");
    }
    CameraIntrinsics out = k;
    if (!aug.matrix().isIdentity(0.0)) {
        out.image_affine = aug.matrix() * k.image_affine;
    }
    out.width = aug.width();
    out.height = aug.height();
    out.validate();
    return out;
}

BevAug::BevAug(const Mat3 &q, double s) : orthogonal_(q), scale_(s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw std::invalid_argument("BEV scale must be positive");
    }
}

BevAug BevAug::identity() { return {Mat3::Identity(), 1.0}; }

BevAug BevAug::flipX() {
    Mat3 q = Mat3::Identity();
    q(1, 1) = -1.0;
    return {q, 1.0};
}

BevAug BevAug::flipY() {
    Mat3 q = Mat3::Identity();
    q(0, 0) = -1.0;
    return {q, 1.0};
}

BevAug BevAug::rotateYaw(double angle) { return {RigidTransform::fromYaw(angle).rotation(), 1.0}; }

BevAug BevAug::scale(double factor) { return {Mat3::Identity(), factor}; }

BevAug BevAug::then(const BevAug &next) const {
    return {next.orthogonal_ * orthogonal_, next.scale_ * scale_};
}

bool BevAug::isMirror() const { return orthogonal_.determinant() < 0.0; }

double normalizeYaw(double angle) {
    double a = std::remainder(angle, 2.0 * std::numbers::pi);
    if (a <= -std::numbers::pi) {
        a += 2.0 * std::numbers::pi;
    }
    return a;
}

void Box3D::validate() const {
    if (!(size.array() > 0.0).all()) {
        throw std::invalid_argument("box sizes must be positive");
    }
}

std::pair<CameraRig, std::vector<Box3D>> applyBevAug(const BevAug &aug, const CameraRig &rig,
                                                     const std::vector<Box3D> &boxes) {
    const Mat3 &q = aug.orthogonal();
    const double s = aug.scaleFactor();
    const bool mirror = aug.isMirror();

    // cam' = s * D * cam(Q^T p'/s): D flips the camera x axis when Q is a
    // mirror so the extrinsic stays a proper rotation; the image-side flip
    // about cx undoes it. Positive scale of camera coordinates leaves pixels
    // unchanged.
    Mat3 d = Mat3::Identity();
    if (mirror) {
        d(0, 0) = -1.0;
    }
    std::vector<Camera> cams(rig.cameras());
    for (auto &cam : cams) {
        const Mat3 r = d * cam.cam_from_ego.rotation() * q.transpose();
        const Vec3 t = s * (d * cam.cam_from_ego.translation());
        cam.cam_from_ego = RigidTransform::fromApproximate(r, t, 1e-6);
        if (mirror) {
            Mat3 flip = Mat3::Identity();
            flip(0, 0) = -1.0;
            flip(0, 2) = 2.0 * cam.intrinsics.cx;
            cam.intrinsics.image_affine = cam.intrinsics.image_affine * flip;
            if (cam.intrinsics.image_affine.isIdentity(0.0)) {
                cam.intrinsics.image_affine = Mat3::Identity();
            }
        }
    }

    std::vector<Box3D> out;
    out.reserve(boxes.size());
    for (const auto &box : boxes) {
        Box3D b = box;
        b.center = aug(box.center);
        b.size = s * box.size;
        if (q.isIdentity(0.0)) {
            b.yaw = normalizeYaw(box.yaw);
        } else {
            const Vec3 heading = q * Vec3(std::cos(box.yaw), std::sin(box.yaw), 0.0);
            b.yaw = normalizeYaw(std::atan2(heading.y(), heading.x()));
        }
        const Vec3 vel = aug(Vec3(box.vx, box.vy, 0.0));
        b.vx = vel.x();
        b.vy = vel.y();
        out.push_back(b);
    }
    return {CameraRig(std::move(cams)), std::move(out)};
}

} // namespace fastray
