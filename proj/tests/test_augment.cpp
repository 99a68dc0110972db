// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/augment.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace fastray;
using fastray::test::Rng;

namespace {

ImageAug randomImageAug(Rng &rng, int w, int h) {
    ImageAug aug = ImageAug::identity(w, h);
    const int steps = test::uniformInt(rng, 1, 4);
    for (int s = 0; s < steps; ++s) {
        const int kind = test::uniformInt(rng, 0, 3);
        const int cw = aug.width();
        const int ch = aug.height();
        switch (kind) {
        case 0:
            aug = aug.then(ImageAug::flipHorizontal(cw, ch));
            break;
        case 1: {
            const int x0 = test::uniformInt(rng, 0, cw / 4);
            const int y0 = test::uniformInt(rng, 0, ch / 4);
            aug = aug.then(ImageAug::crop(x0, y0, cw - x0, ch - y0));
            break;
        }
        case 2:
            aug = aug.then(ImageAug::resize(test::uniform(rng, 0.5, 1.5), cw, ch));
            break;
        default:
            aug = aug.then(ImageAug::rotate(test::uniform(rng, -0.3, 0.3), cw, ch));
            break;
        }
    }
    return aug;
}

BevAug randomBevAug(Rng &rng) {
    BevAug aug = BevAug::rotateYaw(test::uniform(rng, -std::numbers::pi, std::numbers::pi));
    if (test::uniformInt(rng, 0, 1)) {
        aug = aug.then(BevAug::flipX());
    }
    if (test::uniformInt(rng, 0, 1)) {
        aug = aug.then(BevAug::flipY());
    }
    return aug.then(BevAug::scale(test::uniform(rng, 0.9, 1.1)));
}

Box3D box(double x, double y, double yaw, double vx = 0.0, double vy = 0.0) {
    Box3D b;
    b.center = Vec3(x, y, 0.5);
    b.size = Vec3(2.0, 1.5, 4.0);
    b.yaw = yaw;
    b.vx = vx;
    b.vy = vy;
    return b;
}

} // namespace

TEST(ImageAug, IdentityKeepsIntrinsics) {
    Rng rng(1);
    const Camera cam = test::randomCamera(rng, "c", 0.0, 64, 48);
    const CameraIntrinsics k = applyImageAug(ImageAug::identity(64, 48), cam.intrinsics);
    EXPECT_EQ(k, cam.intrinsics);
}

TEST(ImageAug, FlipMapsToMirroredColumn) {
    const ImageAug flip = ImageAug::flipHorizontal(64, 48);
    const Vec3 p = flip.matrix() * Vec3(10.0, 7.0, 1.0);
    EXPECT_DOUBLE_EQ(p.x(), 63.0 - 10.0);
    EXPECT_DOUBLE_EQ(p.y(), 7.0);
    EXPECT_EQ(flip.width(), 64);
}

TEST(ImageAug, CropAndResizeSizes) {
    const ImageAug a = ImageAug::crop(4, 2, 32, 20).then(ImageAug::resize(0.5, 32, 20));
    EXPECT_EQ(a.width(), 16);
    EXPECT_EQ(a.height(), 10);
    EXPECT_THROW(ImageAug::resize(0.0, 32, 20), std::invalid_argument);
    EXPECT_THROW(ImageAug::resize(0.01, 32, 20), std::invalid_argument);
}

TEST(ImageAug, FoldedIntrinsicsMatchAugmentedPixels) {
    Rng rng(2);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Camera cam = test::randomCamera(rng, "c", 0.0, 96, 64);
        const ImageAug aug = randomImageAug(rng, 96, 64);
        const CameraIntrinsics k2 = applyImageAug(aug, cam.intrinsics);
        const Vec3 p(test::uniform(rng, 2, 40), test::uniform(rng, -20, 20), test::uniform(rng, -2, 3));
        const auto before = projectPoint(p, cam.intrinsics, cam.cam_from_ego);
        const auto after = projectPoint(p, k2, cam.cam_from_ego);
        ASSERT_EQ(before.has_value(), after.has_value());
        if (!before) {
            continue;
        }
        const Vec3 moved = aug.matrix() * Vec3(before->u, before->v, 1.0);
        EXPECT_NEAR(after->u, moved.x(), 1e-6);
        EXPECT_NEAR(after->v, moved.y(), 1e-6);
        ++checked;
    }
    EXPECT_GT(checked, 500);
}

TEST(BevAug, IdentityLeavesEverything) {
    Rng rng(3);
    const CameraRig rig = test::randomRig(rng, 3);
    const std::vector<Box3D> boxes = {box(1.0, 2.0, 0.3, 0.5, -0.2)};
    const auto [rig2, boxes2] = applyBevAug(BevAug::identity(), rig, boxes);
    for (std::size_t c = 0; c < rig.size(); ++c) {
        EXPECT_EQ(rig2[c].intrinsics, rig[c].intrinsics);
        EXPECT_LT((rig2[c].cam_from_ego.matrix() - rig[c].cam_from_ego.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_EQ(boxes2[0].center, boxes[0].center);
    EXPECT_DOUBLE_EQ(boxes2[0].yaw, 0.3);
}

TEST(BevAug, QuarterTurnMovesBoxes) {
    const auto [rig, boxes] = applyBevAug(BevAug::rotateYaw(std::numbers::pi / 2), test::goldenRig(),
                                          {box(1.0, 0.0, 0.25, 1.0, 0.0)});
    EXPECT_NEAR(boxes[0].center.x(), 0.0, 1e-12);
    EXPECT_NEAR(boxes[0].center.y(), 1.0, 1e-12);
    EXPECT_NEAR(boxes[0].yaw, 0.25 + std::numbers::pi / 2, 1e-12);
    EXPECT_NEAR(boxes[0].vx, 0.0, 1e-12);
    EXPECT_NEAR(boxes[0].vy, 1.0, 1e-12);
}

TEST(BevAug, MirrorsFlipHeadingAndVelocity) {
    const std::vector<Box3D> in = {box(3.0, 2.0, 0.4, 1.0, 2.0)};
    const auto [rx, bx] = applyBevAug(BevAug::flipX(), test::goldenRig(), in);
    EXPECT_DOUBLE_EQ(bx[0].center.y(), -2.0);
    EXPECT_NEAR(bx[0].yaw, -0.4, 1e-12);
    EXPECT_DOUBLE_EQ(bx[0].vy, -2.0);
    EXPECT_DOUBLE_EQ(bx[0].vx, 1.0);
    const auto [ry, by] = applyBevAug(BevAug::flipY(), test::goldenRig(), in);
    EXPECT_DOUBLE_EQ(by[0].center.x(), -3.0);
    EXPECT_NEAR(by[0].yaw, std::numbers::pi - 0.4, 1e-12);
    EXPECT_DOUBLE_EQ(by[0].vx, -1.0);
    EXPECT_DOUBLE_EQ(by[0].vy, 2.0);
}

TEST(BevAug, DoubleFlipIsIdentity) {
    EXPECT_TRUE(BevAug::flipX().then(BevAug::flipX()).linear().isIdentity(0.0));
    EXPECT_FALSE(BevAug::flipX().then(BevAug::flipX()).isMirror());
    EXPECT_TRUE(BevAug::flipX().isMirror());
}

TEST(BevAug, ScaleScalesSizes) {
    const auto [rig, boxes] = applyBevAug(BevAug::scale(1.05), test::goldenRig(), {box(2.0, 0.0, 0.0)});
    EXPECT_NEAR(boxes[0].size.z(), 4.2, 1e-12);
    EXPECT_NEAR(boxes[0].center.x(), 2.1, 1e-12);
}

TEST(BevAug, YawStaysNormalized) {
    Rng rng(4);
    for (int n = 0; n < 200; ++n) {
        const auto [rig, boxes] =
            applyBevAug(randomBevAug(rng), test::goldenRig(), {box(1.0, 1.0, test::uniform(rng, -10, 10))});
        EXPECT_GT(boxes[0].yaw, -std::numbers::pi);
        EXPECT_LE(boxes[0].yaw, std::numbers::pi);
    }
    EXPECT_DOUBLE_EQ(normalizeYaw(-std::numbers::pi), std::numbers::pi);
    EXPECT_NEAR(normalizeYaw(3 * std::numbers::pi / 2), -std::numbers::pi / 2, 1e-12);
}

TEST(BevAug, AugmentedRigSeesAugmentedWorld) {
    Rng rng(5);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const CameraRig rig = test::randomRig(rng, 2, 32, 64);
        const BevAug aug = randomBevAug(rng);
        const auto [rig2, unused] = applyBevAug(aug, rig, {});
        const Vec3 p(test::uniform(rng, -30, 30), test::uniform(rng, -30, 30), test::uniform(rng, -2, 3));
        for (std::size_t c = 0; c < rig.size(); ++c) {
            const auto before = projectPoint(p, rig[c].intrinsics, rig[c].cam_from_ego);
            const auto after = projectPoint(aug(p), rig2[c].intrinsics, rig2[c].cam_from_ego);
            ASSERT_EQ(before.has_value(), after.has_value());
            if (before) {
                EXPECT_NEAR(after->u, before->u, 1e-6);
                EXPECT_NEAR(after->v, before->v, 1e-6);
                ++checked;
            }
        }
    }
    EXPECT_GT(checked, 300);
}
