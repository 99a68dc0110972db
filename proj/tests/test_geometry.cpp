// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/geometry.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace fastray;
using fastray::test::Rng;

namespace {

CameraIntrinsics simpleK(double f = 100.0, double cx = 32.0, double cy = 24.0) {
    CameraIntrinsics k;
    k.fx = f;
    k.fy = f;
    k.cx = cx;
    k.cy = cy;
    k.width = 64;
    k.height = 48;
    return k;
}

} // namespace

TEST(RigidTransform, IdentityComposeIdentity) {
    const auto id = RigidTransform::identity() * RigidTransform::identity();
    EXPECT_EQ(id, RigidTransform::identity());
}

TEST(RigidTransform, ComposeWithInverseIsIdentity) {
    Rng rng(1);
    for (int n = 0; n < 100; ++n) {
        const auto a = test::randomTransform(rng);
        const auto id = a * a.inverse();
        EXPECT_LT((id.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT(id.translation().cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(RigidTransform, ComposeMatchesSequentialApplication) {
    Rng rng(2);
    for (int n = 0; n < 200; ++n) {
        const auto a = test::randomTransform(rng);
        const auto b = test::randomTransform(rng);
        const Vec3 p(test::uniform(rng, -10, 10), test::uniform(rng, -10, 10), test::uniform(rng, -10, 10));
        EXPECT_LT(((a * b)(p) - a(b(p))).norm(), 1e-12);
        EXPECT_LT((compose(a, b)(p) - a(b(p))).norm(), 1e-12);
    }
}

TEST(RigidTransform, InverseRoundTripOnThousandPoints) {
    Rng rng(3);
    const auto t = test::randomTransform(rng, 50.0);
    const auto inv = t.inverse();
    for (int n = 0; n < 1000; ++n) {
        const Vec3 p(test::uniform(rng, -100, 100), test::uniform(rng, -100, 100), test::uniform(rng, -100, 100));
        EXPECT_LT((inv(t(p)) - p).norm(), 1e-9);
    }
}

TEST(RigidTransform, MatrixFormAgreesWithPairForm) {
    Rng rng(4);
    for (int n = 0; n < 100; ++n) {
        const auto a = test::randomTransform(rng);
        const auto b = test::randomTransform(rng);
        const Mat4 m = a.matrix() * b.matrix();
        const Vec3 p(test::uniform(rng, -10, 10), test::uniform(rng, -10, 10), test::uniform(rng, -10, 10));
        const Eigen::Vector4d h = m * Eigen::Vector4d(p.x(), p.y(), p.z(), 1.0);
        EXPECT_LT((h.head<3>() - (a * b)(p)).norm(), 1e-9);
        EXPECT_LT((RigidTransform::fromMatrix(m)(p) - (a * b)(p)).norm(), 1e-9);
    }
}

TEST(RigidTransform, RejectsImproperRotation) {
    Mat3 mirror = Mat3::Identity();
    mirror(0, 0) = -1.0;
    EXPECT_THROW(RigidTransform(mirror, Vec3::Zero()), std::invalid_argument);
    Mat3 skew = Mat3::Identity();
    skew(0, 1) = 1e-6;
    EXPECT_THROW(RigidTransform(skew, Vec3::Zero()), std::invalid_argument);
    EXPECT_NO_THROW(RigidTransform::fromApproximate(skew, Vec3::Zero(), 1e-5));
    EXPECT_THROW(RigidTransform(Mat3::Identity(), Vec3(0, std::nan(""), 0)), std::invalid_argument);
}

TEST(RigidTransform, FromApproximateSnapsToRotation) {
    Mat3 r = test::rotationZYX(0.3, 0.2, 0.1);
    r(1, 2) += 5e-7;
    const auto t = RigidTransform::fromApproximate(r, Vec3::Zero(), 1e-6);
    EXPECT_FALSE(rotationDefect(t.rotation(), 1e-12).has_value());
    EXPECT_EQ(RigidTransform::fromApproximate(Mat3::Identity(), Vec3::Zero(), 1e-6), RigidTransform::identity());
}

TEST(ProjectPoint, OpticalAxisMapsToPrincipalPoint) {
    const auto px = projectPoint(Vec3(0, 0, 2.5), simpleK(), RigidTransform::identity());
    ASSERT_TRUE(px);
    EXPECT_DOUBLE_EQ(px->u, 32.0);
    EXPECT_DOUBLE_EQ(px->v, 24.0);
    EXPECT_DOUBLE_EQ(px->depth, 2.5);
}

TEST(ProjectPoint, BehindOrOnCameraPlaneIsNone) {
    EXPECT_FALSE(projectPoint(Vec3(0.3, 0.1, -1.0), simpleK(), RigidTransform::identity()));
    EXPECT_FALSE(projectPoint(Vec3(0.3, 0.1, 0.0), simpleK(), RigidTransform::identity()));
}

TEST(ProjectPoint, PinholeFormula) {
    const auto px = projectPoint(Vec3(1.0, -0.5, 4.0), simpleK(80.0, 10.0, 20.0), RigidTransform::identity());
    ASSERT_TRUE(px);
    EXPECT_DOUBLE_EQ(px->u, 80.0 * 0.25 + 10.0);
    EXPECT_DOUBLE_EQ(px->v, 80.0 * -0.125 + 20.0);
}

TEST(ProjectPoint, MatchesHomogeneousMatrixOracle) {
    Rng rng(5);
    int checked = 0;
    for (int n = 0; n < 500; ++n) {
        const Camera cam = test::randomCamera(rng, "c", test::uniform(rng, -3, 3), 64, 48);
        const Vec3 p(test::uniform(rng, -20, 20), test::uniform(rng, -20, 20), test::uniform(rng, -3, 3));
        const auto got = projectPoint(p, cam.intrinsics, cam.cam_from_ego);
        const auto want = test::oracleProject(cam, p);
        ASSERT_EQ(got.has_value(), want.has_value());
        if (got) {
            EXPECT_NEAR(got->u, want->u, 1e-9 * std::max(1.0, std::abs(want->u)));
            EXPECT_NEAR(got->v, want->v, 1e-9 * std::max(1.0, std::abs(want->v)));
            EXPECT_NEAR(got->depth, want->depth, 1e-9);
            ++checked;
        }
    }
    EXPECT_GT(checked, 100);
}

TEST(ProjectPoint, UnprojectRoundTrip) {
    Rng rng(6);
    for (int n = 0; n < 500; ++n) {
        const Camera cam = test::randomCamera(rng, "c", test::uniform(rng, -3, 3), 64, 48);
        const Vec3 p(test::uniform(rng, -30, 30), test::uniform(rng, -30, 30), test::uniform(rng, -3, 3));
        const auto px = projectPoint(p, cam.intrinsics, cam.cam_from_ego);
        if (!px) {
            continue;
        }
        EXPECT_LT((unprojectPixel(px->u, px->v, px->depth, cam.intrinsics, cam.cam_from_ego) - p).norm(), 1e-6);
    }
}

TEST(CameraIntrinsics, Validation) {
    auto k = simpleK();
    EXPECT_NO_THROW(k.validate());
    k.fx = 0.0;
    EXPECT_THROW(k.validate(), std::invalid_argument);
    k = simpleK();
    k.height = 0;
    EXPECT_THROW(k.validate(), std::invalid_argument);
    k = simpleK();
    k.image_affine(2, 0) = 0.5;
    EXPECT_THROW(k.validate(), std::invalid_argument);
}

TEST(CameraRig, RejectsDuplicateNames) {
    Camera a{"front", simpleK(), RigidTransform::identity()};
    EXPECT_THROW(CameraRig({a, a}), std::invalid_argument);
    Camera b{"back", simpleK(), RigidTransform::fromYaw(std::numbers::pi)};
    EXPECT_EQ(CameraRig({a, b}).size(), 2u);
}

TEST(VoxelGrid, CenterHalfPitch) {
    VoxelGridSpec g;
    g.x = {0.0, 2.0, 2};
    EXPECT_DOUBLE_EQ(voxelCenter(g, 0, 0, 0).x(), 0.5);
    EXPECT_DOUBLE_EQ(voxelCenter(g, 1, 0, 0).x(), 1.5);
}

TEST(VoxelGrid, DefaultRangeFirstCenter) {
    const VoxelGridSpec g;
    EXPECT_EQ(g.nx(), 200);
    EXPECT_EQ(g.ny(), 200);
    EXPECT_EQ(g.nz(), 6);
    const Vec3 c = voxelCenter(g, 0, 0, 0);
    EXPECT_DOUBLE_EQ(c.x(), -49.75);
    EXPECT_DOUBLE_EQ(c.y(), -49.75);
    EXPECT_NEAR(c.z(), -5.0 + 0.5 * 8.0 / 6.0, 1e-12);
}

TEST(VoxelGrid, OutOfRangeIndexThrows) {
    const VoxelGridSpec g = VoxelGridSpec::withCells(4, 3, 2);
    EXPECT_THROW(voxelCenter(g, 4, 0, 0), std::out_of_range);
    EXPECT_THROW(voxelCenter(g, 0, -1, 0), std::out_of_range);
    EXPECT_THROW(voxelCenter(g, 0, 0, 2), std::out_of_range);
}

TEST(VoxelGrid, OffsetOrderXOutermost) {
    const VoxelGridSpec g = VoxelGridSpec::withCells(4, 3, 2);
    EXPECT_EQ(g.offset(0, 0, 1), 1u);
    EXPECT_EQ(g.offset(0, 1, 0), 2u);
    EXPECT_EQ(g.offset(1, 0, 0), 6u);
    EXPECT_EQ(g.offset(3, 2, 1), 23u);
}

TEST(VoxelGrid, ValidateRejectsEmptyRanges) {
    VoxelGridSpec g;
    g.x.max = g.x.min;
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g = VoxelGridSpec{};
    g.z.cells = 0;
    EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(ScaleRig, DividesIntrinsicsAndFloorsSize) {
    Camera cam{"c", simpleK(100.0, 31.0, 23.0), RigidTransform::identity()};
    cam.intrinsics.width = 65;
    cam.intrinsics.height = 47;
    const CameraRig scaled = scaleRig(CameraRig({cam}), 4);
    const auto &k = scaled[0].intrinsics;
    EXPECT_DOUBLE_EQ(k.fx, 25.0);
    EXPECT_DOUBLE_EQ(k.cx, 7.75);
    EXPECT_EQ(k.width, 16);
    EXPECT_EQ(k.height, 11);
}
