#include "ocm3d/geometry.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <tuple>

#include "ocm3d/angles.hpp"
#include "ocm3d/errors.hpp"

namespace ocm3d {
namespace {

double Cross(const std::array<double, 2>& a, const std::array<double, 2>& b,
             const std::array<double, 2>& p) {
  return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
}

double SignedArea(const Polygon2& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    twice += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * twice;
}

auto BoxKey(const Box3D& b) {
  return std::tie(b.center.x, b.center.y, b.center.z, b.dims.h, b.dims.w, b.dims.l,
                  b.rotation_y);
}

// Bottom and top of the box along y (y points down).
std::pair<double, double> VerticalExtent(const Box3D& b) {
  return {b.center.y, b.center.y - b.dims.h};
}

}  // namespace

Point3 Backproject(double u, double v, double depth, const CameraCalib& calib) {
  if (!(depth > 0.0)) {
    throw DomainError(fmt::format("back-projection needs depth > 0, got {}", depth));
  }
  const auto& p = calib.p;
  // Solve P * (x, y, depth, 1) ~ (u, v, 1) for x and y.
  const double a00 = p[0][0] - u * p[2][0];
  const double a01 = p[0][1] - u * p[2][1];
  const double a10 = p[1][0] - v * p[2][0];
  const double a11 = p[1][1] - v * p[2][1];
  const double b0 = u * (p[2][2] * depth + p[2][3]) - p[0][2] * depth - p[0][3];
  const double b1 = v * (p[2][2] * depth + p[2][3]) - p[1][2] * depth - p[1][3];
  const double det = a00 * a11 - a01 * a10;
  if (det == 0.0) throw DomainError("singular camera matrix");
  return {(b0 * a11 - a01 * b1) / det, (a00 * b1 - b0 * a10) / det, depth};
}

PixelCoord Project(const Point3& pt, const CameraCalib& calib) {
  if (!(pt.z > 0.0)) {
    throw BehindCameraError(fmt::format("point at z={} is behind the camera", pt.z));
  }
  const auto& p = calib.p;
  const double u = p[0][0] * pt.x + p[0][1] * pt.y + p[0][2] * pt.z + p[0][3];
  const double v = p[1][0] * pt.x + p[1][1] * pt.y + p[1][2] * pt.z + p[1][3];
  const double w = p[2][0] * pt.x + p[2][1] * pt.y + p[2][2] * pt.z + p[2][3];
  if (!(w > 0.0)) {
    throw BehindCameraError("point projects to non-positive homogeneous depth");
  }
  return {u / w, v / w};
}

std::array<Point3, 8> Box3DCorners(const Box3D& box) {
  const double c = std::cos(box.rotation_y);
  const double s = std::sin(box.rotation_y);
  const double hl = box.dims.l / 2.0;
  const double hw = box.dims.w / 2.0;
  const std::array<double, 4> xs{hl, hl, -hl, -hl};
  const std::array<double, 4> zs{hw, -hw, -hw, hw};
  std::array<Point3, 8> corners;
  for (int i = 0; i < 4; ++i) {
    const double x = box.center.x + c * xs[i] + s * zs[i];
    const double z = box.center.z - s * xs[i] + c * zs[i];
    corners[i] = {x, box.center.y, z};
    corners[i + 4] = {x, box.center.y - box.dims.h, z};
  }
  return corners;
}

std::array<std::array<double, 2>, 4> BevFootprint(const Box3D& box) {
  const auto corners = Box3DCorners(box);
  std::array<std::array<double, 2>, 4> fp;
  for (int i = 0; i < 4; ++i) fp[i] = {corners[i].x, corners[i].z};
  const Polygon2 poly(fp.begin(), fp.end());
  if (SignedArea(poly) < 0.0) std::reverse(fp.begin(), fp.end());
  return fp;
}

Box2D ProjectBox3D(const Box3D& box, const CameraCalib& calib, ImageSize image_size,
                   bool clip) {
  const auto corners = Box3DCorners(box);
  if (std::none_of(corners.begin(), corners.end(),
                   [](const Point3& p) { return p.z > 0.0; })) {
    throw BehindCameraError("every box corner is behind the camera");
  }
  Box2D hull{INFINITY, INFINITY, -INFINITY, -INFINITY};
  for (Point3 p : corners) {
    p.z = std::max(p.z, kMinProjectionDepth);
    const PixelCoord px = Project(p, calib);
    hull.left = std::min(hull.left, px.u);
    hull.top = std::min(hull.top, px.v);
    hull.right = std::max(hull.right, px.u);
    hull.bottom = std::max(hull.bottom, px.v);
  }
  if (clip) {
    const double w = image_size.width;
    const double h = image_size.height;
    hull.left = std::clamp(hull.left, 0.0, w);
    hull.right = std::clamp(hull.right, 0.0, w);
    hull.top = std::clamp(hull.top, 0.0, h);
    hull.bottom = std::clamp(hull.bottom, 0.0, h);
  }
  return hull;
}

double Iou2D(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.right, b.right) - std::max(a.left, b.left);
  const double ih = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double Overlap2DOverFirst(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.right, b.right) - std::max(a.left, b.left);
  const double ih = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
  const double area = a.area();
  if (iw <= 0.0 || ih <= 0.0 || area <= 0.0) return 0.0;
  return std::clamp(iw * ih / area, 0.0, 1.0);
}

Polygon2 ClipConvexPolygon(const Polygon2& subject, const Polygon2& clip) {
  Polygon2 output = subject;
  for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
    const auto& a = clip[e];
    const auto& b = clip[(e + 1) % clip.size()];
    Polygon2 input;
    input.swap(output);
    for (std::size_t i = 0; i < input.size(); ++i) {
      const auto& p = input[i];
      const auto& q = input[(i + 1) % input.size()];
      const double dp = Cross(a, b, p);
      const double dq = Cross(a, b, q);
      if (dp >= 0.0) output.push_back(p);
      if ((dp >= 0.0) != (dq >= 0.0)) {
        const double t = dp / (dp - dq);
        output.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
      }
    }
  }
  return output;
}

double PolygonArea(const Polygon2& polygon) {
  if (polygon.size() < 3) return 0.0;
  return std::abs(SignedArea(polygon));
}

double BevIntersectionArea(const Box3D& a, const Box3D& b) {
  const auto fa = BevFootprint(a);
  const auto fb = BevFootprint(b);
  const double area =
      PolygonArea(ClipConvexPolygon(Polygon2(fa.begin(), fa.end()),
                                    Polygon2(fb.begin(), fb.end())));
  return area < kAreaEpsilon ? 0.0 : area;
}

double IouBev(const Box3D& a_in, const Box3D& b_in) {
  const bool swap = BoxKey(b_in) < BoxKey(a_in);
  const Box3D& a = swap ? b_in : a_in;
  const Box3D& b = swap ? a_in : b_in;
  const double inter = BevIntersectionArea(a, b);
  if (inter == 0.0) return 0.0;
  const auto fa = BevFootprint(a);
  const auto fb = BevFootprint(b);
  const double area_a = PolygonArea(Polygon2(fa.begin(), fa.end()));
  const double area_b = PolygonArea(Polygon2(fb.begin(), fb.end()));
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double Iou3D(const Box3D& a_in, const Box3D& b_in) {
  const bool swap = BoxKey(b_in) < BoxKey(a_in);
  const Box3D& a = swap ? b_in : a_in;
  const Box3D& b = swap ? a_in : b_in;
  const auto [bottom_a, top_a] = VerticalExtent(a);
  const auto [bottom_b, top_b] = VerticalExtent(b);
  const double overlap_y = std::min(bottom_a, bottom_b) - std::max(top_a, top_b);
  if (overlap_y <= 0.0) return 0.0;
  const double inter_area = BevIntersectionArea(a, b);
  if (inter_area == 0.0) return 0.0;
  const auto fa = BevFootprint(a);
  const auto fb = BevFootprint(b);
  const double vol_a = PolygonArea(Polygon2(fa.begin(), fa.end())) * (bottom_a - top_a);
  const double vol_b = PolygonArea(Polygon2(fb.begin(), fb.end())) * (bottom_b - top_b);
  const double inter = inter_area * overlap_y;
  const double uni = vol_a + vol_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double AlphaToRotationY(double alpha, const Point3& location) {
  if (!(location.z > 0.0)) {
    throw DomainError(fmt::format("viewing angle needs z > 0, got {}", location.z));
  }
  return WrapAngle(alpha + std::atan2(location.x, location.z));
}

double RotationYToAlpha(double rotation_y, const Point3& location) {
  if (!(location.z > 0.0)) {
    throw DomainError(fmt::format("viewing angle needs z > 0, got {}", location.z));
  }
  return WrapAngle(rotation_y - std::atan2(location.x, location.z));
}

double FrustumAngle(const Box2D& box2d, const CameraCalib& calib) {
  const double u = 0.5 * (box2d.left + box2d.right);
  const double v = 0.5 * (box2d.top + box2d.bottom);
  const Point3 ray = Backproject(u, v, 1.0, calib);
  return std::atan2(ray.x, ray.z);
}

Point3 RotateIntoFrustum(const Point3& p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {p.x * c - p.z * s, p.y, p.x * s + p.z * c};
}

Point3 RotateOutOfFrustum(const Point3& p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {p.x * c + p.z * s, p.y, -p.x * s + p.z * c};
}

FrustumRotation FrustumRotate(std::span<const Point3> points, const Box2D& box2d,
                              const CameraCalib& calib) {
  if (points.empty()) throw DomainError("frustum rotation of an empty point set");
  FrustumRotation out;
  out.angle = FrustumAngle(box2d, calib);
  out.points.reserve(points.size());
  for (const Point3& p : points) out.points.push_back(RotateIntoFrustum(p, out.angle));
  return out;
}

}  // namespace ocm3d
