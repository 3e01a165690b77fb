#include "ocm3d/voxelizer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ocm3d/errors.hpp"
#include "ocm3d/geometry.hpp"

namespace ocm3d {
namespace {

double Coordinate(const Point3& p, int axis) {
  return axis == 0 ? p.x : axis == 1 ? p.y : p.z;
}

void CheckShape(GridShape shape) {
  if (shape.nx < 1 || shape.ny < 1 || shape.nz < 1) {
    throw DomainError(
        fmt::format("grid shape must be positive, got ({}, {}, {})", shape.nx, shape.ny,
                    shape.nz));
  }
}

void CheckNotEmpty(std::span<const Point3> points) {
  if (points.empty()) throw DomainError("cannot build a grid over an empty cloud");
}

}  // namespace

GridShape GridSpec::shape() const {
  return {static_cast<int>(boundaries[0].size()) - 1,
          static_cast<int>(boundaries[1].size()) - 1,
          static_cast<int>(boundaries[2].size()) - 1};
}

int GridSpec::CellIndex(int axis, double value, bool* out_of_range) const {
  const auto& b = boundaries[static_cast<std::size_t>(axis)];
  const auto n = static_cast<int>(b.size()) - 1;
  if (value < b.front()) {
    if (out_of_range) *out_of_range = true;
    return 0;
  }
  if (value >= b.back()) {
    if (value > b.back() && out_of_range) *out_of_range = true;
    // The last interval is closed. A fully collapsed axis has one cell.
    return b.front() == b.back() ? 0 : n - 1;
  }
  const auto k = std::upper_bound(b.begin(), b.end(), value) - b.begin() - 1;
  return static_cast<int>(k);
}

std::array<int, 3> GridSpec::Cell(const Point3& p, bool* out_of_range) const {
  bool oor = false;
  std::array<int, 3> cell{CellIndex(0, p.x, &oor), CellIndex(1, p.y, &oor),
                          CellIndex(2, p.z, &oor)};
  if (out_of_range) *out_of_range = oor;
  return cell;
}

Point3 GridSpec::CellCenter(const std::array<int, 3>& cell) const {
  std::array<double, 3> mid{};
  for (int axis = 0; axis < 3; ++axis) {
    const auto& b = boundaries[static_cast<std::size_t>(axis)];
    const auto k = static_cast<std::size_t>(cell[static_cast<std::size_t>(axis)]);
    mid[static_cast<std::size_t>(axis)] = 0.5 * (b[k] + b[k + 1]);
  }
  return {mid[0], mid[1], mid[2]};
}

std::size_t GridSpec::FlatIndex(const std::array<int, 3>& cell) const {
  const GridShape s = shape();
  return (static_cast<std::size_t>(cell[0]) * s.ny + cell[1]) * s.nz + cell[2];
}

double VoxelGrid::feature(const std::array<int, 3>& cell, int channel) const {
  return features[spec.FlatIndex(cell) * 3 + static_cast<std::size_t>(channel)];
}

std::uint32_t VoxelGrid::count(const std::array<int, 3>& cell) const {
  return counts[spec.FlatIndex(cell)];
}

std::uint64_t VoxelGrid::total_count() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

double VoxelGrid::occupancy() const {
  if (counts.empty()) return 0.0;
  const auto occupied = std::count_if(counts.begin(), counts.end(),
                                      [](std::uint32_t c) { return c > 0; });
  return static_cast<double>(occupied) / static_cast<double>(counts.size());
}

RoiPointCloud ExtractRoiPoints(const DepthMap& depth, const PixelSource& rgb,
                               const Box2D& box2d, const CameraCalib& calib) {
  if (depth.width() != rgb.width() || depth.height() != rgb.height()) {
    throw DomainError(fmt::format("depth is {}x{} but image is {}x{}", depth.width(),
                                  depth.height(), rgb.width(), rgb.height()));
  }
  const int u0 = std::max(0, static_cast<int>(std::ceil(box2d.left)));
  const int v0 = std::max(0, static_cast<int>(std::ceil(box2d.top)));
  const int u1 = std::min(depth.width(), static_cast<int>(std::ceil(box2d.right)));
  const int v1 = std::min(depth.height(), static_cast<int>(std::ceil(box2d.bottom)));
  if (u0 >= u1 || v0 >= v1) {
    throw DomainError(fmt::format("box [{}, {}, {}, {}] does not cover any image pixel",
                                  box2d.left, box2d.top, box2d.right, box2d.bottom));
  }
  RoiPointCloud cloud;
  for (int v = v0; v < v1; ++v) {
    for (int u = u0; u < u1; ++u) {
      if (!depth.valid(u, v)) continue;
      cloud.points.push_back(Backproject(u, v, depth.at(u, v), calib));
      cloud.colors.push_back(rgb.at(u, v));
      cloud.source_pixels.push_back({u, v});
    }
  }
  if (cloud.points.empty()) {
    throw EmptyRoiError(fmt::format("no valid depth inside box [{}, {}, {}, {}]",
                                    box2d.left, box2d.top, box2d.right, box2d.bottom));
  }
  return cloud;
}

OutlierResult RemoveOutliers(const RoiPointCloud& cloud, double margin) {
  if (cloud.points.empty()) throw DomainError("outlier removal on an empty cloud");
  if (!(margin > 0.0)) {
    throw DomainError(fmt::format("outlier margin must be > 0, got {}", margin));
  }
  double sum = 0.0;
  for (const Point3& p : cloud.points) sum += p.z;
  const double cutoff = sum / static_cast<double>(cloud.size()) + margin;

  OutlierResult result;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.points[i].z > cutoff) continue;
    result.cloud.points.push_back(cloud.points[i]);
    result.cloud.colors.push_back(cloud.colors[i]);
    result.cloud.source_pixels.push_back(cloud.source_pixels[i]);
  }
  if (result.cloud.points.empty()) {
    const auto nearest = static_cast<std::size_t>(
        std::min_element(cloud.points.begin(), cloud.points.end(),
                         [](const Point3& a, const Point3& b) { return a.z < b.z; }) -
        cloud.points.begin());
    result.cloud.points.push_back(cloud.points[nearest]);
    result.cloud.colors.push_back(cloud.colors[nearest]);
    result.cloud.source_pixels.push_back(cloud.source_pixels[nearest]);
    result.degenerate = true;
  }
  result.removed = cloud.size() - result.cloud.size();
  return result;
}

GridSpec ObjectAwareGrid(std::span<const Point3> points, GridShape shape) {
  CheckShape(shape);
  CheckNotEmpty(points);
  GridSpec spec;
  spec.mode = GridMode::kObjectAware;
  for (int axis = 0; axis < 3; ++axis) {
    double lo = Coordinate(points.front(), axis);
    double hi = lo;
    for (const Point3& p : points) {
      lo = std::min(lo, Coordinate(p, axis));
      hi = std::max(hi, Coordinate(p, axis));
    }
    const int n = shape[axis];
    const double size = (hi - lo) / n;
    auto& b = spec.boundaries[static_cast<std::size_t>(axis)];
    b.resize(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k < n; ++k) b[static_cast<std::size_t>(k)] = lo + k * size;
    // Pinned so the farthest point is never lost to rounding.
    b[static_cast<std::size_t>(n)] = hi;
  }
  return spec;
}

GridSpec PointAwareGrid(std::span<const Point3> points, GridShape shape) {
  CheckShape(shape);
  CheckNotEmpty(points);
  GridSpec spec;
  spec.mode = GridMode::kPointAware;
  const std::size_t count = points.size();
  std::vector<double> sorted(count);
  for (int axis = 0; axis < 3; ++axis) {
    for (std::size_t i = 0; i < count; ++i) sorted[i] = Coordinate(points[i], axis);
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<std::size_t>(shape[axis]);
    auto& b = spec.boundaries[static_cast<std::size_t>(axis)];
    b.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      b[k] = sorted[std::min(k * count / n, count - 1)];
    }
  }
  return spec;
}

GridSpec BuildGrid(std::span<const Point3> points, GridShape shape, GridMode mode) {
  return mode == GridMode::kObjectAware ? ObjectAwareGrid(points, shape)
                                        : PointAwareGrid(points, shape);
}

VoxelGrid Voxelize(const RoiPointCloud& cloud, const GridSpec& spec) {
  const GridShape shape = spec.shape();
  CheckShape(shape);
  VoxelGrid grid;
  grid.spec = spec;
  grid.features.assign(shape.cells() * 3, 0.0);
  grid.counts.assign(shape.cells(), 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    bool oor = false;
    const std::size_t flat = spec.FlatIndex(spec.Cell(cloud.points[i], &oor));
    if (oor) ++grid.out_of_range;
    ++grid.counts[flat];
    const Rgb& c = cloud.colors[i];
    grid.features[flat * 3 + 0] += c.r;
    grid.features[flat * 3 + 1] += c.g;
    grid.features[flat * 3 + 2] += c.b;
  }
  for (std::size_t flat = 0; flat < grid.counts.size(); ++flat) {
    if (grid.counts[flat] == 0) continue;
    const double n = grid.counts[flat];
    for (std::size_t ch = 0; ch < 3; ++ch) grid.features[flat * 3 + ch] /= n;
  }
  return grid;
}

double RotateCloudIntoFrustum(RoiPointCloud& cloud, const Box2D& box2d,
                              const CameraCalib& calib) {
  const FrustumRotation rotated = FrustumRotate(cloud.points, box2d, calib);
  cloud.points = rotated.points;
  return rotated.angle;
}

ObjectVoxels VoxelizeObject(const DepthMap& depth, const PixelSource& rgb,
                            const Box2D& box2d, const CameraCalib& calib,
                            const VoxelizeOptions& options) {
  ObjectVoxels out;
  OutlierResult filtered =
      RemoveOutliers(ExtractRoiPoints(depth, rgb, box2d, calib), options.outlier_margin);
  out.outliers_removed = filtered.removed;
  out.degenerate_cloud = filtered.degenerate;
  out.cloud = std::move(filtered.cloud);
  if (options.frustum_rotate) {
    out.frustum_angle = RotateCloudIntoFrustum(out.cloud, box2d, calib);
  }
  out.grid = Voxelize(out.cloud, BuildGrid(out.cloud.points, options.shape, options.mode));
  return out;
}

}  // namespace ocm3d
