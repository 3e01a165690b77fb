#pragma once

#include <array>
#include <span>
#include <vector>

#include "ocm3d/voxelizer.hpp"

namespace ocm3d {

struct Heatmap3D {
  GridSpec spec;
  // Same flat x-major layout as VoxelGrid counts.
  std::vector<double> scores;

  double at(const std::array<int, 3>& cell) const {
    return scores[spec.FlatIndex(cell)];
  }
};

inline constexpr double kDefaultHeatmapRadius = 2.0;

// Isotropic Gaussian in cell-index space, sigma = radius / 3, peak 1.0 at the
// cell holding `center` (clamped into the grid).
Heatmap3D HeatmapTarget(const GridSpec& spec, const Point3& center,
                        double radius = kDefaultHeatmapRadius);

struct DecodedCenter {
  Point3 center;
  std::array<int, 3> cell{};
  double score = 0.0;
  bool no_peak = false;  // every score was zero
};

// Arg-max with ties resolved to the lowest flat index.
DecodedCenter DecodeCenter(const Heatmap3D& heatmap);

inline constexpr double kDefaultSmoothL1Beta = 1.0;

// Mean-reduced smooth L1.
double SmoothL1(std::span<const double> pred, std::span<const double> target,
                double beta = kDefaultSmoothL1Beta);

}  // namespace ocm3d
