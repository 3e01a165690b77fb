#pragma once

#include <vector>

#include "ocm3d/types.hpp"

namespace ocm3d {

inline constexpr double kDefaultDepthScale = 80.0;
inline constexpr ImageSize kKittiImageSize{1242, 375};

struct RescoreConfig {
  double lambda = kDefaultDepthScale;  // meters
  bool clip_projection = true;
  ImageSize image_size = kKittiImageSize;
};

struct LiftingConfidence {
  double value = 0.0;
  double projection_iou = 0.0;
  double distance = 0.0;
  bool behind_camera = false;
};

// IoU(projected 3D hull, 2D box) / exp(|center| / lambda).
LiftingConfidence ComputeLiftingConfidence(const Box3D& box3d, const Box2D& box2d,
                                           const CameraCalib& calib,
                                           const RescoreConfig& config = {});

double LiftingConfidenceValue(const Box3D& box3d, const Box2D& box2d,
                              const CameraCalib& calib,
                              const RescoreConfig& config = {});

struct RescoreStats {
  std::size_t behind_camera = 0;
};

// score <- score * lifting confidence. Order and all other fields preserved.
// DontCare rows pass through untouched. Throws ValidationError naming the
// 1-based row of any detection without a score.
std::vector<ObjectRecord> Rescore(const std::vector<ObjectRecord>& detections,
                                  const CameraCalib& calib,
                                  const RescoreConfig& config = {},
                                  RescoreStats* stats = nullptr);

}  // namespace ocm3d
