// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/geometry.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fastray {

std::optional<std::string> rotationDefect(const Mat3 &r, double tolerance) {
    if (!r.allFinite()) {
        return "rotation has non-finite entries";
    }
    const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > tolerance) {
        std::ostringstream os;
        os << "rotation is not orthonormal (max |R^T R - I| = " << ortho << ")";
        return os.str();
    }
    const double det = r.determinant();
    if (std::abs(det - 1.0) > tolerance) {
        std::ostringstream os;
        os << "rotation determinant is " << det << ", expected +1";
        return os.str();
    }
    return std::nullopt;
}

RigidTransform::RigidTransform(const Mat3 &rotation, const Vec3 &translation)
    : rotation_(rotation), translation_(translation) {
    if (auto defect = rotationDefect(rotation, kRotationTolerance)) {
        throw std::invalid_argument(*defect);
    }
    if (!translation.allFinite()) {
        throw std::invalid_argument("translation has non-finite entries");
    }
}

RigidTransform RigidTransform::fromApproximate(const Mat3 &rotation, const Vec3 &translation,
                                               double tolerance) {
    if (auto defect = rotationDefect(rotation, tolerance)) {
        throw std::invalid_argument(*defect);
    }
    Eigen::JacobiSVD<Mat3> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 snapped = svd.matrixU() * svd.matrixV().transpose();
    // Keep exactly-valid input untouched so identity stays bit-identical.
    if ((snapped - rotation).cwiseAbs().maxCoeff() <= kRotationTolerance * 1e-3) {
        snapped = rotation;
    }
    return RigidTransform(snapped, translation);
}

RigidTransform RigidTransform::fromYaw(double yaw, const Vec3 &t) {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    Mat3 r;
    r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    return RigidTransform(r, t);
}

RigidTransform RigidTransform::fromMatrix(const Mat4 &m) {
    if (m.row(3) != Eigen::RowVector4d(0.0, 0.0, 0.0, 1.0)) {
        throw std::invalid_argument("homogeneous transform must have last row [0 0 0 1]");
    }
    return RigidTransform(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

RigidTransform RigidTransform::inverse() const {
    RigidTransform out;
    out.rotation_ = rotation_.transpose();
    out.translation_ = -(out.rotation_ * translation_);
    return out;
}

Mat4 RigidTransform::matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation_;
    m.topRightCorner<3, 1>() = translation_;
    return m;
}

RigidTransform operator*(const RigidTransform &a, const RigidTransform &b) {
    RigidTransform out;
    out.rotation_ = a.rotation_ * b.rotation_;
    out.translation_ = a.rotation_ * b.translation_ + a.translation_;
    return out;
}

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
        throw std::invalid_argument("focal lengths must be positive and finite");
    }
    if (!std::isfinite(cx) || !std::isfinite(cy)) {
        throw std::invalid_argument("principal point must be finite");
    }
    if (width < 1 || height < 1) {
        throw std::invalid_argument("image size must be at least 1x1");
    }
    if (!image_affine.allFinite() || image_affine.row(2) != Eigen::RowVector3d(0.0, 0.0, 1.0)) {
        throw std::invalid_argument("image affine must be finite with last row [0 0 1]");
    }
    if (image_affine.topLeftCorner<2, 2>().determinant() == 0.0) {
        throw std::invalid_argument("image affine is singular");
    }
}

Mat3 CameraIntrinsics::matrix() const {
    Mat3 k;
    k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return image_affine * k;
}

CameraRig::CameraRig(std::vector<Camera> cameras) : cameras_(std::move(cameras)) {
    std::set<std::string> names;
    for (const auto &cam : cameras_) {
        try {
            cam.intrinsics.validate();
        } catch (const std::invalid_argument &e) {
            throw std::invalid_argument("camera '" + cam.name + "': " + e.what());
        }
        if (!names.insert(cam.name).second) {
            throw std::invalid_argument("duplicate camera name '" + cam.name + "'");
        }
    }
}

VoxelGridSpec VoxelGridSpec::withCells(std::int64_t nx, std::int64_t ny, std::int64_t nz) {
    VoxelGridSpec g;
    g.x.cells = nx;
    g.y.cells = ny;
    g.z.cells = nz;
    return g;
}

void VoxelGridSpec::validate() const {
    for (const AxisRange *a : {&x, &y, &z}) {
        if (!std::isfinite(a->min) || !std::isfinite(a->max) || !(a->max > a->min)) {
            throw std::invalid_argument("grid axis needs finite min < max");
        }
        if (a->cells < 1) {
            throw std::invalid_argument("grid axis needs at least one cell");
        }
    }
}

Vec3 voxelCenter(const VoxelGridSpec &grid, std::int64_t i, std::int64_t j, std::int64_t k) {
    if (i < 0 || i >= grid.nx() || j < 0 || j >= grid.ny() || k < 0 || k >= grid.nz()) {
        std::ostringstream os;
        os << "voxel index (" << i << ", " << j << ", " << k << ") outside grid " << grid.nx()
           << "x" << grid.ny() << "x" << grid.nz();
        throw std::out_of_range(os.str());
    }
    return {grid.x.center(i), grid.y.center(j), grid.z.center(k)};
}

std::optional<PixelProjection> projectPoint(const Vec3 &p_ego, const CameraIntrinsics &cam,
                                            const RigidTransform &cam_from_ego) {
    const Vec3 p = cam_from_ego(p_ego);
    if (!(p.z() > 0.0)) {
        return std::nullopt;
    }
    const double u = cam.fx * p.x() / p.z() + cam.cx;
    const double v = cam.fy * p.y() / p.z() + cam.cy;
    if (cam.image_affine.isIdentity(0.0)) {
        return PixelProjection{u, v, p.z()};
    }
    const auto &a = cam.image_affine;
    return PixelProjection{a(0, 0) * u + a(0, 1) * v + a(0, 2), a(1, 0) * u + a(1, 1) * v + a(1, 2),
                           p.z()};
}

Vec3 unprojectPixel(double u, double v, double depth, const CameraIntrinsics &cam,
                    const RigidTransform &cam_from_ego) {
    Eigen::Vector3d px(u, v, 1.0);
    if (!cam.image_affine.isIdentity(0.0)) {
        px = cam.image_affine.inverse() * px;
    }
    const Vec3 p_cam((px.x() - cam.cx) / cam.fx * depth, (px.y() - cam.cy) / cam.fy * depth, depth);
    return cam_from_ego.inverse()(p_cam);
}

CameraRig scaleRig(const CameraRig &rig, int stride) {
    if (stride < 1) {
        throw std::invalid_argument("stride must be >= 1");
    }
    if (stride == 1) {
        return rig;
    }
    const double s = static_cast<double>(stride);
    std::vector<Camera> cams(rig.cameras());
    for (auto &cam : cams) {
        auto &k = cam.intrinsics;
        k.fx /= s;
        k.fy /= s;
        k.cx /= s;
        k.cy /= s;
        k.width = std::max(1, k.width / stride);
        k.height = std::max(1, k.height / stride);
        if (!k.image_affine.isIdentity(0.0)) {
            Mat3 down = Mat3::Identity();
            down(0, 0) = down(1, 1) = 1.0 / s;
            Mat3 up = Mat3::Identity();
            up(0, 0) = up(1, 1) = s;
            k.image_affine = down * k.image_affine * up;
        }
    }
    return CameraRig(std::move(cams));
}

} // namespace fastray
