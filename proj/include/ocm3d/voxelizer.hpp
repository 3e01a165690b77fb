#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ocm3d/image.hpp"
#include "ocm3d/kitti_io.hpp"
#include "ocm3d/types.hpp"

namespace ocm3d {

struct RoiPointCloud {
  std::vector<Point3> points;
  std::vector<Rgb> colors;
  std::vector<std::array<int, 2>> source_pixels;

  std::size_t size() const { return points.size(); }
};

struct GridShape {
  int nx = 32;
  int ny = 16;
  int nz = 64;

  int operator[](int axis) const { return axis == 0 ? nx : axis == 1 ? ny : nz; }
  std::size_t cells() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

enum class GridMode : std::uint8_t { kObjectAware = 0, kPointAware = 1 };

struct GridSpec {
  std::array<std::vector<double>, 3> boundaries;
  GridMode mode = GridMode::kObjectAware;

  GridShape shape() const;
  // Cell index along `axis`: the half-open interval [b_k, b_k+1) holding
  // `value`, the last interval closed. When every boundary on the axis is
  // equal the axis has a single cell, 0. Values outside [b_0, b_n] are
  // clamped; `out_of_range` reports it.
  int CellIndex(int axis, double value, bool* out_of_range = nullptr) const;
  std::array<int, 3> Cell(const Point3& p, bool* out_of_range = nullptr) const;
  // Midpoint of the cell's interval on each axis.
  Point3 CellCenter(const std::array<int, 3>& cell) const;
  std::size_t FlatIndex(const std::array<int, 3>& cell) const;
};

struct VoxelGrid {
  GridSpec spec;
  // Flat x-major layout: ((ix * ny + iy) * nz + iz) * 3 + channel.
  std::vector<double> features;
  std::vector<std::uint32_t> counts;
  // Points that fell outside the grid and were clamped into a border cell.
  std::uint64_t out_of_range = 0;

  double feature(const std::array<int, 3>& cell, int channel) const;
  std::uint32_t count(const std::array<int, 3>& cell) const;
  std::uint64_t total_count() const;
  double occupancy() const;
};

// One point per valid-depth pixel u in [left, right), v in [top, bottom).
RoiPointCloud ExtractRoiPoints(const DepthMap& depth, const PixelSource& rgb,
                               const Box2D& box2d, const CameraCalib& calib);

inline constexpr double kDefaultOutlierMargin = 3.0;

struct OutlierResult {
  RoiPointCloud cloud;
  std::size_t removed = 0;
  // Nothing survived the cutoff; only the nearest point was kept.
  bool degenerate = false;
};

// Keeps points with z <= mean(z) + margin.
OutlierResult RemoveOutliers(const RoiPointCloud& cloud,
                             double margin = kDefaultOutlierMargin);

// Uniform per-axis spacing (max - min) / n.
GridSpec ObjectAwareGrid(std::span<const Point3> points, GridShape shape = {});
// Per-axis quantile boundaries: sorted[floor(k * N / n)], index N clamped
// to N - 1.
GridSpec PointAwareGrid(std::span<const Point3> points, GridShape shape = {});
GridSpec BuildGrid(std::span<const Point3> points, GridShape shape, GridMode mode);

// Mean RGB per cell; empty cells stay zero with zero count.
VoxelGrid Voxelize(const RoiPointCloud& cloud, const GridSpec& spec);

// Applies the frustum rotation to a cloud; returns the rotation angle.
double RotateCloudIntoFrustum(RoiPointCloud& cloud, const Box2D& box2d,
                              const CameraCalib& calib);

struct VoxelizeOptions {
  GridShape shape;
  GridMode mode = GridMode::kPointAware;
  double outlier_margin = kDefaultOutlierMargin;
  bool frustum_rotate = true;
};

// Full per-object path: extract -> outliers -> rotate -> grid -> voxelize.
struct ObjectVoxels {
  VoxelGrid grid;
  RoiPointCloud cloud;  // the cloud actually voxelized (rotated if enabled)
  double frustum_angle = 0.0;
  std::size_t outliers_removed = 0;
  bool degenerate_cloud = false;
};

ObjectVoxels VoxelizeObject(const DepthMap& depth, const PixelSource& rgb,
                            const Box2D& box2d, const CameraCalib& calib,
                            const VoxelizeOptions& options = {});

}  // namespace ocm3d
