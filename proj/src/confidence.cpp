#include "ocm3d/confidence.hpp"

#include <fmt/format.h>

#include <cmath>

#include "ocm3d/errors.hpp"
#include "ocm3d/geometry.hpp"

namespace ocm3d {

LiftingConfidence ComputeLiftingConfidence(const Box3D& box3d, const Box2D& box2d,
                                           const CameraCalib& calib,
                                           const RescoreConfig& config) {
  if (!(config.lambda > 0.0)) {
    throw DomainError(fmt::format("lambda must be > 0, got {}", config.lambda));
  }
  LiftingConfidence out;
  const Point3& c = box3d.center;
  out.distance = std::sqrt(c.x * c.x + c.y * c.y + c.z * c.z);
  try {
    const Box2D projected =
        ProjectBox3D(box3d, calib, config.image_size, config.clip_projection);
    out.projection_iou = Iou2D(projected, box2d);
  } catch (const BehindCameraError&) {
    out.behind_camera = true;
    return out;
  }
  out.value = out.projection_iou / std::exp(out.distance / config.lambda);
  return out;
}

double LiftingConfidenceValue(const Box3D& box3d, const Box2D& box2d,
                              const CameraCalib& calib, const RescoreConfig& config) {
  return ComputeLiftingConfidence(box3d, box2d, calib, config).value;
}

std::vector<ObjectRecord> Rescore(const std::vector<ObjectRecord>& detections,
                                  const CameraCalib& calib, const RescoreConfig& config,
                                  RescoreStats* stats) {
  std::vector<ObjectRecord> out = detections;
  for (std::size_t i = 0; i < out.size(); ++i) {
    ObjectRecord& det = out[i];
    if (det.is_dont_care()) continue;
    if (!det.score) {
      throw ValidationError(fmt::format("detection on line {} has no score", i + 1));
    }
    const LiftingConfidence lift =
        ComputeLiftingConfidence(det.box3d(), det.box2d, calib, config);
    if (lift.behind_camera && stats) ++stats->behind_camera;
    det.score = *det.score * lift.value;
  }
  return out;
}

}  // namespace ocm3d
