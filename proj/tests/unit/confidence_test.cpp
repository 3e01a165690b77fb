#include "ocm3d/confidence.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "ocm3d/errors.hpp"
#include "ocm3d/geometry.hpp"

namespace ocm3d {
namespace {

const Dims kCar{1.52, 1.63, 3.88};

Box3D CarAt(const Point3& p, double ry = 0.0) { return Box3D{p, kCar, ry}; }

Box2D FitBox(const Box3D& b, const CameraCalib& calib) {
  return ProjectBox3D(b, calib, kKittiImageSize, true);
}

ObjectRecord Detection(const Box3D& b, const Box2D& box2d, double score) {
  ObjectRecord r;
  r.class_name = "Car";
  r.box2d = box2d;
  r.dims = b.dims;
  r.location = b.center;
  r.rotation_y = b.rotation_y;
  r.score = score;
  return r;
}

TEST(LiftingConfidence, PerfectFitAtLambda) {
  const CameraCalib calib = gen::SyntheticCalib();
  const Box3D b = CarAt({0.0, 0.0, 80.0});
  const LiftingConfidence c = ComputeLiftingConfidence(b, FitBox(b, calib), calib);
  EXPECT_DOUBLE_EQ(c.projection_iou, 1.0);
  EXPECT_DOUBLE_EQ(c.distance, 80.0);
  EXPECT_NEAR(c.value, 0.367879, 1e-6);
  EXPECT_FALSE(c.behind_camera);
}

TEST(LiftingConfidence, WorkedRescoreExample) {
  const CameraCalib calib = gen::SyntheticCalib();
  const Box3D b = CarAt({0.0, 0.0, 40.0});
  const Box2D box2d = gen::ShiftedToIou(FitBox(b, calib), 0.9);
  const auto out = Rescore({Detection(b, box2d, 0.8)}, calib);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(*out[0].score, 0.436703, 1e-6);
}

TEST(LiftingConfidence, DistanceUsesFullLocation) {
  const CameraCalib calib = gen::SyntheticCalib();
  const Box3D b = CarAt({3.0, 1.65, 20.0});
  const LiftingConfidence c = ComputeLiftingConfidence(b, FitBox(b, calib), calib);
  EXPECT_DOUBLE_EQ(c.distance, std::sqrt(9.0 + 1.65 * 1.65 + 400.0));
  EXPECT_NEAR(c.value, std::exp(-c.distance / 80.0), 1e-12);
}

TEST(LiftingConfidence, MonotoneInDepthAndIou) {
  const CameraCalib calib = gen::SyntheticCalib();
  double previous = 2.0;
  for (double z = 5.0; z <= 70.0; z += 2.5) {
    const Box3D b = CarAt({0.0, 1.65, z});
    const double v = LiftingConfidenceValue(b, FitBox(b, calib), calib);
    EXPECT_LT(v, previous) << z;
    previous = v;
  }
  const Box3D b = CarAt({1.0, 1.65, 25.0});
  previous = 2.0;
  for (double iou = 1.0; iou >= 0.05; iou -= 0.05) {
    const double v =
        LiftingConfidenceValue(b, gen::ShiftedToIou(FitBox(b, calib), iou), calib);
    EXPECT_LT(v, previous) << iou;
    previous = v;
  }
}

TEST(LiftingConfidence, BoundedOnRandomBoxes) {
  const CameraCalib calib = gen::SyntheticCalib();
  gen::Rng rng(61);
  for (int i = 0; i < 500; ++i) {
    Box3D b = gen::RandomBox(rng, 3.0);
    b.center.z += gen::Uniform(rng, 4.0, 60.0);
    const Box2D box2d = gen::RandomBox2D(rng, 1200.0);
    const double v = LiftingConfidenceValue(b, box2d, calib);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(LiftingConfidence, ClipOptionMatters) {
  const CameraCalib calib = gen::SyntheticCalib();
  // Straddles the left border.
  const Box3D b = CarAt({-5.0, 1.65, 6.0}, 0.4);
  const Box2D clipped = FitBox(b, calib);
  RescoreConfig no_clip;
  no_clip.clip_projection = false;
  const double a = LiftingConfidenceValue(b, clipped, calib);
  const double c = LiftingConfidenceValue(b, clipped, calib, no_clip);
  EXPECT_GT(a, 0.0);
  EXPECT_GT(a, c);
}

TEST(LiftingConfidence, BadLambda) {
  const CameraCalib calib = gen::SyntheticCalib();
  RescoreConfig cfg;
  cfg.lambda = 0.0;
  const Box3D b = CarAt({0, 1.65, 10});
  EXPECT_THROW(ComputeLiftingConfidence(b, FitBox(b, calib), calib, cfg), DomainError);
}

TEST(Rescore, ZeroScoreStaysZeroAndOrderKept) {
  const CameraCalib calib = gen::SyntheticCalib();
  std::vector<ObjectRecord> dets;
  for (int i = 0; i < 6; ++i) {
    const Box3D b = CarAt({-6.0 + 2.5 * i, 1.65, 12.0 + 5.0 * i});
    dets.push_back(Detection(b, FitBox(b, calib), i == 2 ? 0.0 : 0.1 * (i + 1)));
  }
  ObjectRecord dc;
  dc.class_name = "DontCare";
  dc.box2d = {10, 10, 50, 40};
  dc.dims = {-1, -1, -1};
  dc.location = {-1000, -1000, -1000};
  dc.rotation_y = -10;
  dets.insert(dets.begin() + 3, dc);

  const auto out = Rescore(dets, calib);
  ASSERT_EQ(out.size(), dets.size());
  EXPECT_EQ(*out[2].score, 0.0);
  EXPECT_EQ(out[3].class_name, "DontCare");
  EXPECT_FALSE(out[3].score.has_value());
  EXPECT_EQ(out[3].location, dc.location);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].box2d, dets[i].box2d);
    EXPECT_EQ(out[i].location, dets[i].location);
    if (dets[i].score && *dets[i].score > 0) EXPECT_LT(*out[i].score, *dets[i].score);
  }
}

TEST(Rescore, BehindCameraIsZeroedAndCounted) {
  const CameraCalib calib = gen::SyntheticCalib();
  const Box3D front = CarAt({0, 1.65, 15});
  const Box3D behind = CarAt({0, 1.65, -12});
  std::vector<ObjectRecord> dets = {Detection(front, FitBox(front, calib), 0.9),
                                    Detection(behind, Box2D{500, 150, 600, 220}, 0.7)};
  RescoreStats stats;
  const auto out = Rescore(dets, calib, {}, &stats);
  EXPECT_EQ(stats.behind_camera, 1u);
  EXPECT_EQ(*out[1].score, 0.0);
  EXPECT_GT(*out[0].score, 0.0);
  const LiftingConfidence c =
      ComputeLiftingConfidence(behind, Box2D{500, 150, 600, 220}, calib);
  EXPECT_TRUE(c.behind_camera);
  EXPECT_EQ(c.value, 0.0);
}

TEST(Rescore, MissingScoreNamesRow) {
  const CameraCalib calib = gen::SyntheticCalib();
  const Box3D b = CarAt({0, 1.65, 15});
  std::vector<ObjectRecord> dets = {Detection(b, FitBox(b, calib), 0.5),
                                    Detection(b, FitBox(b, calib), 0.5)};
  dets[1].score.reset();
  try {
    Rescore(dets, calib);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Rescore, PoorFitDropsBelowGoodFit) {
  const CameraCalib calib = gen::SyntheticCalib();
  const Box3D a = CarAt({-3.0, 1.65, 25.0});
  const Box3D b = CarAt({3.0, 1.65, 25.0});
  // Equal 2D scores at equal depth; only the fit differs.
  const std::vector<ObjectRecord> dets = {
      Detection(a, gen::ShiftedToIou(FitBox(a, calib), 0.4), 0.9),
      Detection(b, gen::ShiftedToIou(FitBox(b, calib), 0.95), 0.9)};
  const auto out = Rescore(dets, calib);
  EXPECT_LT(*out[0].score, *out[1].score);
  EXPECT_NEAR(*out[0].score / *out[1].score, 0.4 / 0.95, 1e-9);
}

}  // namespace
}  // namespace ocm3d
