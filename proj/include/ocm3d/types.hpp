#pragma once

#include <array>
#include <optional>
#include <string>

namespace ocm3d {

// Camera frame: x right, y down, z forward. Meters.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

// Pixel-space axis-aligned box.
struct Box2D {
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;

  double width() const { return right - left; }
  double height() const { return bottom - top; }
  double area() const;

  friend bool operator==(const Box2D&, const Box2D&) = default;
};

// KITTI order: height, width, length.
struct Dims {
  double h = 0.0;
  double w = 0.0;
  double l = 0.0;

  friend bool operator==(const Dims&, const Dims&) = default;
};

// Oriented cuboid. `center` is the bottom-face center as stored in KITTI
// labels; the top face sits at center.y - dims.h.
struct Box3D {
  Point3 center;
  Dims dims;
  double rotation_y = 0.0;

  friend bool operator==(const Box3D&, const Box3D&) = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

// Rectified projective camera (KITTI P2).
struct CameraCalib {
  std::array<std::array<double, 4>, 3> p{};

  double fx() const { return p[0][0]; }
  double fy() const { return p[1][1]; }
  double cx() const { return p[0][2]; }
  double cy() const { return p[1][2]; }
  double tx() const { return p[0][3]; }
  double ty() const { return p[1][3]; }

  static CameraCalib FromIntrinsics(double fx, double fy, double cx, double cy,
                                    double tx = 0.0, double ty = 0.0);
};

// One row of a KITTI label or detection file.
struct ObjectRecord {
  std::string class_name;
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;
  Box2D box2d;
  Dims dims;
  Point3 location;
  double rotation_y = 0.0;
  std::optional<double> score;

  bool is_dont_care() const { return class_name == "DontCare"; }
  Box3D box3d() const { return Box3D{location, dims, rotation_y}; }
};

}  // namespace ocm3d
