#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ocm3d/heatmap.hpp"
#include "ocm3d/voxelizer.hpp"

namespace ocm3d {

// Little-endian container shared by voxel grids ("OCMV") and heatmaps
// ("OCMH"):
//
//   char[4]  magic
//   u8       version (1)
//   u8       grid mode (0 object-aware, 1 point-aware)
//   u16      reserved, 0
//   u32      nx, ny, nz
//   f64      boundaries_x[nx+1], boundaries_y[ny+1], boundaries_z[nz+1]
//   OCMV: f32 features[nx*ny*nz*3], u32 counts[nx*ny*nz], u64 out_of_range
//   OCMH: f32 scores[nx*ny*nz]
//
// Cell payloads are x-major: ((ix * ny + iy) * nz + iz).
inline constexpr std::uint8_t kGridFormatVersion = 1;

std::vector<std::uint8_t> EncodeVoxelGrid(const VoxelGrid& grid);
VoxelGrid DecodeVoxelGrid(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> EncodeHeatmap(const Heatmap3D& heatmap);
Heatmap3D DecodeHeatmap(std::span<const std::uint8_t> bytes);

// Occupancy and per-axis boundaries, for humans.
std::string SummarizeVoxelGrid(const VoxelGrid& grid);

}  // namespace ocm3d
