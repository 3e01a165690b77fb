#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "ocm3d/types.hpp"

namespace ocm3d {

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

// Inverse pinhole with the rectified baseline terms:
//   x = ((u - cx) * d - tx) / fx,  y = ((v - cy) * d - ty) / fy,  z = d.
Point3 Backproject(double u, double v, double depth, const CameraCalib& calib);

// Homogeneous projection through P. Throws BehindCameraError for z <= 0.
PixelCoord Project(const Point3& p, const CameraCalib& calib);

// Corner order: 0-3 bottom face, 4-7 top face, same footprint order.
std::array<Point3, 8> Box3DCorners(const Box3D& box);

// Footprint in the x-z plane, counter-clockwise when viewed with +x right
// and +z up.
std::array<std::array<double, 2>, 4> BevFootprint(const Box3D& box);

// Corners closer than this are pushed onto this plane before projecting.
inline constexpr double kMinProjectionDepth = 1e-3;

// Axis-aligned hull of the projected corners, optionally clipped to the
// image rectangle [0, w] x [0, h].
Box2D ProjectBox3D(const Box3D& box, const CameraCalib& calib,
                   ImageSize image_size, bool clip);

double Iou2D(const Box2D& a, const Box2D& b);
// Intersection area over the area of `a` (used for DontCare regions).
double Overlap2DOverFirst(const Box2D& a, const Box2D& b);

// Areas below this count as empty.
inline constexpr double kAreaEpsilon = 1e-12;

using Polygon2 = std::vector<std::array<double, 2>>;

// Convex clipping of `subject` by the convex, counter-clockwise `clip`.
Polygon2 ClipConvexPolygon(const Polygon2& subject, const Polygon2& clip);
double PolygonArea(const Polygon2& polygon);

double BevIntersectionArea(const Box3D& a, const Box3D& b);
double IouBev(const Box3D& a, const Box3D& b);
double Iou3D(const Box3D& a, const Box3D& b);

// rotation_y = alpha + atan2(x, z), wrapped. Throws DomainError for z <= 0.
double AlphaToRotationY(double alpha, const Point3& location);
double RotationYToAlpha(double rotation_y, const Point3& location);

// Rigid rotation about the y axis taking the ray through `box2d`'s center
// onto +z.
struct FrustumRotation {
  std::vector<Point3> points;
  double angle = 0.0;  // viewing angle of the box center ray
};

double FrustumAngle(const Box2D& box2d, const CameraCalib& calib);
FrustumRotation FrustumRotate(std::span<const Point3> points,
                              const Box2D& box2d, const CameraCalib& calib);

// Rotates into (forward) or out of (inverse) the frustum frame.
Point3 RotateIntoFrustum(const Point3& p, double angle);
Point3 RotateOutOfFrustum(const Point3& p, double angle);

}  // namespace ocm3d
