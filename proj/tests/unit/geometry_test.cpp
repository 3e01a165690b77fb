#include "ocm3d/geometry.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "generators.hpp"
#include "golden.hpp"
#include "ocm3d/angles.hpp"
#include "ocm3d/errors.hpp"
#include "oracles.hpp"

namespace ocm3d {
namespace {

const CameraCalib kCalib = CameraCalib::FromIntrinsics(700, 700, 600, 180);

TEST(Backproject, PrincipalRay) {
  const Point3 p = Backproject(600, 180, 10, kCalib);
  EXPECT_EQ(p, (Point3{0, 0, 10}));
}

TEST(Backproject, OneFocalLengthRight) {
  const Point3 p = Backproject(600 + 700, 180, 10, kCalib);
  EXPECT_DOUBLE_EQ(p.x, 10);
  EXPECT_DOUBLE_EQ(p.y, 0);
  EXPECT_DOUBLE_EQ(p.z, 10);
}

TEST(Backproject, BaselineTerms) {
  const CameraCalib c = CameraCalib::FromIntrinsics(700, 700, 600, 180, 45, 0);
  const Point3 p = Backproject(600, 180, 10, c);
  EXPECT_DOUBLE_EQ(p.x, -45.0 / 700.0);
  const PixelCoord uv = Project(p, c);
  EXPECT_NEAR(uv.u, 600, 1e-9);
}

TEST(Backproject, NonPositiveDepth) {
  EXPECT_THROW(Backproject(1, 1, 0, kCalib), DomainError);
  EXPECT_THROW(Backproject(1, 1, -2, kCalib), DomainError);
}

TEST(Project, Examples) {
  const PixelCoord c = Project({0, 0, 10}, kCalib);
  EXPECT_DOUBLE_EQ(c.u, 600);
  EXPECT_DOUBLE_EQ(c.v, 180);
  EXPECT_DOUBLE_EQ(Project({10, 0, 10}, kCalib).u, 1300);
  EXPECT_THROW(Project({0, 0, -1}, kCalib), BehindCameraError);
  EXPECT_THROW(Project({0, 0, 0}, kCalib), BehindCameraError);
}

TEST(Project, RoundTripRandom) {
  gen::Rng rng(3);
  for (int i = 0; i < 20000; ++i) {
    const CameraCalib c = CameraCalib::FromIntrinsics(
        gen::Uniform(rng, 300, 1500), gen::Uniform(rng, 300, 1500), gen::Uniform(rng, 0, 1300),
        gen::Uniform(rng, 0, 400), gen::Uniform(rng, -50, 50), gen::Uniform(rng, -1, 1));
    const double u = gen::Uniform(rng, -200, 1500);
    const double v = gen::Uniform(rng, -200, 600);
    const PixelCoord back = Project(Backproject(u, v, gen::Uniform(rng, 0.1, 120), c), c);
    ASSERT_NEAR(back.u, u, 1e-6);
    ASSERT_NEAR(back.v, v, 1e-6);
  }
}

TEST(Box3DCorners, HandExample) {
  const Box3D b{{0, 1, 10}, {2, 2, 4}, 0.0};
  const auto corners = Box3DCorners(b);
  std::set<double> xs, ys, zs;
  for (const Point3& p : corners) {
    xs.insert(p.x);
    ys.insert(p.y);
    zs.insert(p.z);
  }
  EXPECT_EQ(xs, (std::set<double>{-2, 2}));
  EXPECT_EQ(ys, (std::set<double>{-1, 1}));
  EXPECT_EQ(zs, (std::set<double>{9, 11}));
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(corners[i].y, 1);
    EXPECT_EQ(corners[i + 4].y, -1);
  }
}

TEST(Box3DCorners, QuarterTurnSwapsExtents) {
  const Box3D b{{0, 1, 10}, {2, 2, 4}, kPi / 2};
  double xmax = -1e9, zmax = -1e9;
  for (const Point3& p : Box3DCorners(b)) {
    xmax = std::max(xmax, p.x);
    zmax = std::max(zmax, p.z);
  }
  EXPECT_NEAR(xmax, 1.0, 1e-12);
  EXPECT_NEAR(zmax, 12.0, 1e-12);
}

TEST(Box3DCorners, FullTurnInvariant) {
  gen::Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    Box3D a = gen::RandomBox(rng);
    Box3D b = a;
    b.rotation_y += 2 * kPi;
    const auto ca = Box3DCorners(a);
    const auto cb = Box3DCorners(b);
    for (int k = 0; k < 8; ++k) {
      EXPECT_NEAR(ca[k].x, cb[k].x, 1e-9);
      EXPECT_NEAR(ca[k].z, cb[k].z, 1e-9);
    }
  }
}

TEST(BevFootprint, CounterClockwise) {
  gen::Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto fp = BevFootprint(gen::RandomBox(rng));
    Polygon2 poly(fp.begin(), fp.end());
    double signed_area = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& p = poly[k];
      const auto& q = poly[(k + 1) % 4];
      signed_area += p[0] * q[1] - q[0] * p[1];
    }
    EXPECT_GT(signed_area, 0.0);
  }
}

TEST(ProjectBox3D, SymmetricOnPrincipalRay) {
  const Box3D b{{0, 0.75, 20}, {1.5, 1.6, 1.6}, 0.0};
  const Box2D h = ProjectBox3D(b, kCalib, {1242, 375}, false);
  EXPECT_NEAR(600 - h.left, h.right - 600, 1e-9);
  EXPECT_NEAR(180 - h.top, h.bottom - 180, 1e-9);
}

TEST(ProjectBox3D, DoublingDepthHalvesExtent) {
  const Box3D near{{1, 1.5, 30}, {1.5, 1.6, 3.9}, 0.3};
  Box3D far = near;
  far.center = {2, 3, 60};  // same ray, twice the distance
  const Box2D a = ProjectBox3D(near, kCalib, {1242, 375}, false);
  const Box2D b = ProjectBox3D(far, kCalib, {1242, 375}, false);
  EXPECT_NEAR(b.width() / a.width(), 0.5, 0.05);
  EXPECT_NEAR(b.height() / a.height(), 0.5, 0.05);
  const Box2D oracle = oracle::ProjectHull(far, kCalib, 1242, 375, false);
  EXPECT_NEAR(b.left, oracle.left, 1e-9);
  EXPECT_NEAR(b.bottom, oracle.bottom, 1e-9);
}

TEST(ProjectBox3D, MatchesMatrixOracle) {
  gen::Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    Box3D b = gen::RandomBox(rng, 8.0);
    const bool clip = gen::Chance(rng, 0.5);
    const Box2D got = ProjectBox3D(b, kCalib, {1242, 375}, clip);
    const Box2D want = oracle::ProjectHull(b, kCalib, 1242, 375, clip);
    ASSERT_NEAR(got.left, want.left, 1e-6);
    ASSERT_NEAR(got.top, want.top, 1e-6);
    ASSERT_NEAR(got.right, want.right, 1e-6);
    ASSERT_NEAR(got.bottom, want.bottom, 1e-6);
  }
}

TEST(ProjectBox3D, ClipClampsToImage) {
  const Box3D b{{-8, 1.5, 6}, {1.5, 1.6, 3.9}, 0.0};
  const Box2D raw = ProjectBox3D(b, kCalib, {1242, 375}, false);
  ASSERT_LT(raw.left, 0.0);
  const Box2D clipped = ProjectBox3D(b, kCalib, {1242, 375}, true);
  EXPECT_EQ(clipped.left, 0.0);
  EXPECT_EQ(clipped.right, std::clamp(raw.right, 0.0, 1242.0));
  EXPECT_LE(clipped.bottom, 375.0);
}

TEST(ProjectBox3D, StraddlingAndBehind) {
  const Box3D straddle{{0, 1, 1}, {1.5, 1.6, 3.9}, kPi / 2};
  EXPECT_NO_THROW(ProjectBox3D(straddle, kCalib, {1242, 375}, true));
  const Box3D behind{{0, 1, -10}, {1.5, 1.6, 3.9}, 0.0};
  EXPECT_THROW(ProjectBox3D(behind, kCalib, {1242, 375}, true), BehindCameraError);
}

TEST(Iou2D, Examples) {
  const Box2D a{0, 0, 1, 1};
  EXPECT_EQ(Iou2D(a, a), 1.0);
  EXPECT_EQ(Iou2D(a, {2, 2, 3, 3}), 0.0);
  EXPECT_DOUBLE_EQ(Iou2D(a, {0.5, 0, 1.5, 1}), 1.0 / 3.0);
  EXPECT_EQ(Iou2D({1, 1, 1, 1}, {1, 1, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(Overlap2DOverFirst({0, 0, 1, 1}, {0.5, 0, 5, 5}), 0.5);
}

TEST(ClipConvexPolygon, SquareClippedBySquare) {
  const Polygon2 a = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const Polygon2 b = {{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  EXPECT_DOUBLE_EQ(PolygonArea(ClipConvexPolygon(a, b)), 1.0);
  const Polygon2 far = {{5, 5}, {6, 5}, {6, 6}, {5, 6}};
  EXPECT_EQ(PolygonArea(ClipConvexPolygon(a, far)), 0.0);
}

TEST(IouBev, Examples) {
  const Box3D a{{0, 1, 10}, {1.5, 2, 2}, 0.0};
  EXPECT_EQ(IouBev(a, a), 1.0);
  Box3D flipped = a;
  flipped.rotation_y = kPi;
  EXPECT_NEAR(IouBev(a, flipped), 1.0, 1e-12);
  Box3D shifted = a;
  shifted.center.x += 1.0;
  EXPECT_NEAR(IouBev(a, shifted), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(oracle::RasterBev(a, shifted, 1e-3).iou(), 1.0 / 3.0, 1e-3);
  shifted.center.x += 5.0;
  EXPECT_EQ(IouBev(a, shifted), 0.0);
}

TEST(Iou3D, Examples) {
  const Box3D a{{0, 1, 10}, {1.5, 1.6, 3.9}, 0.4};
  EXPECT_EQ(Iou3D(a, a), 1.0);
  Box3D up = a;
  up.center.y -= a.dims.h;
  EXPECT_EQ(Iou3D(a, up), 0.0);
  Box3D half = a;
  half.center.y -= a.dims.h / 2.0;
  EXPECT_NEAR(Iou3D(a, half), 1.0 / 3.0, 1e-12);
}

TEST(RotatedIou, PropertiesOnRandomPairs) {
  gen::Rng rng(9);
  for (int i = 0; i < 300; ++i) {
    const Box3D a = gen::RandomBox(rng, 2.0);
    const Box3D b = gen::RandomBox(rng, 2.0);
    const double ab = IouBev(a, b);
    EXPECT_EQ(ab, IouBev(b, a));
    EXPECT_EQ(Iou3D(a, b), Iou3D(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_LE(Iou3D(a, b), 1.0);
    EXPECT_NEAR(ab, oracle::RasterBev(a, b, 2e-3).iou(), 3e-3);
    EXPECT_NEAR(Iou3D(a, b), oracle::RasterIou3D(a, b, 2e-3), 3e-3);
  }
}

TEST(RotatedIou, OneOnlyForSameFootprint) {
  gen::Rng rng(10);
  for (int i = 0; i < 100; ++i) {
    Box3D a = gen::RandomBox(rng);
    Box3D b = a;
    b.rotation_y = a.rotation_y + kPi;
    EXPECT_NEAR(IouBev(a, b), 1.0, 1e-9);
    b.center.x += 0.01;
    EXPECT_LT(IouBev(a, b), 1.0);
  }
}

TEST(AlphaRotation, Examples) {
  EXPECT_DOUBLE_EQ(AlphaToRotationY(0.7, {0, 1, 10}), 0.7);
  EXPECT_DOUBLE_EQ(AlphaToRotationY(0.0, {5, 1, 5}), kPi / 4);
  EXPECT_THROW(AlphaToRotationY(0.0, {1, 1, 0}), DomainError);
  EXPECT_THROW(RotationYToAlpha(0.0, {1, 1, -3}), DomainError);
}

TEST(AlphaRotation, RoundTripWrapped) {
  gen::Rng rng(12);
  for (int i = 0; i < 10000; ++i) {
    const double a = gen::Uniform(rng, -kPi, kPi);
    const Point3 p{gen::Uniform(rng, -40, 40), 1.5, gen::Uniform(rng, 0.5, 80)};
    const double ry = AlphaToRotationY(a, p);
    EXPECT_GE(ry, -kPi);
    EXPECT_LE(ry, kPi);
    EXPECT_LT(AngularDistance(RotationYToAlpha(ry, p), a), 1e-9);
  }
}

TEST(WrapAngle, Range) {
  EXPECT_DOUBLE_EQ(WrapAngle(-kPi), kPi);
  EXPECT_DOUBLE_EQ(WrapAngle(kPi), kPi);
  EXPECT_NEAR(WrapAngle(3 * kPi / 2), -kPi / 2, 1e-12);
  EXPECT_NEAR(AngularDistance(kPi - 0.1, -kPi + 0.1), 0.2, 1e-12);
}

TEST(FrustumRotate, CenteredBoxIsIdentity) {
  const std::vector<Point3> pts = {{1, 2, 3}, {-4, 0.5, 12}};
  const auto r = FrustumRotate(pts, {500, 100, 700, 260}, kCalib);
  EXPECT_EQ(r.angle, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(r.points[i].x, pts[i].x, 1e-15);
    EXPECT_NEAR(r.points[i].z, pts[i].z, 1e-15);
  }
}

TEST(FrustumRotate, CenterRayMapsToZAxis) {
  const Box2D box{900, 150, 1100, 250};
  const Point3 on_ray = Backproject(1000, 200, 23.0, kCalib);
  const auto r = FrustumRotate(std::vector<Point3>{on_ray}, box, kCalib);
  EXPECT_NEAR(r.points[0].x, 0.0, 1e-12);
  EXPECT_GT(r.points[0].z, 0.0);
  EXPECT_DOUBLE_EQ(r.points[0].y, on_ray.y);
}

TEST(FrustumRotate, RigidAndInvertible) {
  gen::Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Point3> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(gen::RandomPoint(rng, -10, 10));
    const Box2D box = gen::RandomBox2D(rng, 1200);
    const auto r = FrustumRotate(pts, box, kCalib);
    EXPECT_NEAR(r.angle, FrustumAngle(box, kCalib), 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      EXPECT_EQ(r.points[i].y, pts[i].y);
      const Point3 back = RotateOutOfFrustum(r.points[i], r.angle);
      EXPECT_NEAR(back.x, pts[i].x, 1e-9);
      EXPECT_NEAR(back.z, pts[i].z, 1e-9);
      for (std::size_t j = 0; j < i; ++j) {
        const double d0 = std::hypot(pts[i].x - pts[j].x, pts[i].z - pts[j].z);
        const double d1 =
            std::hypot(r.points[i].x - r.points[j].x, r.points[i].z - r.points[j].z);
        EXPECT_NEAR(d0, d1, 1e-9);
      }
    }
  }
  EXPECT_THROW(FrustumRotate(std::vector<Point3>{}, {0, 0, 1, 1}, kCalib), DomainError);
}

// Two side-by-side cars at equal depth project to nearly the same overlap at
// every distance; the growth with distance comes from error along the ray.
TEST(ProjectedOverlap, SweepMatchesGolden) {
  const CameraCalib calib = gen::SyntheticCalib();
  for (std::size_t i = 0; i < golden::kSweepDepths.size(); ++i) {
    const double z = golden::kSweepDepths[i];
    const Box3D a{{0, 1.65, z}, {1.52, 1.63, 3.88}, 0.0};
    Box3D along = a;
    along.center.z += 2.0;
    Box3D side = a;
    side.center.x += 2.0;
    const Box2D pa = ProjectBox3D(a, calib, {1242, 375}, true);
    EXPECT_NEAR(Iou2D(pa, ProjectBox3D(along, calib, {1242, 375}, true)),
                golden::kDepthOffsetIou[i], 1e-12);
    EXPECT_NEAR(Iou2D(pa, ProjectBox3D(side, calib, {1242, 375}, true)),
                golden::kLateralOffsetIou[i], 1e-12);
  }
  EXPECT_LT(golden::kLateralOffsetIou.front() - golden::kLateralOffsetIou.back(), 0.01);
}

}  // namespace
}  // namespace ocm3d
