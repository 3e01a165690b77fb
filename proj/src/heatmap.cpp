#include "ocm3d/heatmap.hpp"

#include <fmt/format.h>

#include <cmath>

#include "ocm3d/errors.hpp"

namespace ocm3d {

Heatmap3D HeatmapTarget(const GridSpec& spec, const Point3& center, double radius) {
  if (!(radius > 0.0)) {
    throw DomainError(fmt::format("heatmap radius must be > 0, got {}", radius));
  }
  bool degenerate = true;
  for (const auto& b : spec.boundaries) {
    if (b.size() < 2) throw DegenerateGridError("grid axis without cells");
    degenerate = degenerate && b.front() == b.back();
  }
  if (degenerate) throw DegenerateGridError("every grid axis has zero extent");

  const GridShape shape = spec.shape();
  const std::array<int, 3> peak = spec.Cell(center);
  const double sigma = radius / 3.0;
  const double denom = 2.0 * sigma * sigma;

  Heatmap3D heatmap;
  heatmap.spec = spec;
  heatmap.scores.resize(shape.cells());
  std::size_t flat = 0;
  for (int ix = 0; ix < shape.nx; ++ix) {
    const double dx = ix - peak[0];
    for (int iy = 0; iy < shape.ny; ++iy) {
      const double dy = iy - peak[1];
      for (int iz = 0; iz < shape.nz; ++iz, ++flat) {
        const double dz = iz - peak[2];
        heatmap.scores[flat] = std::exp(-(dx * dx + dy * dy + dz * dz) / denom);
      }
    }
  }
  return heatmap;
}

DecodedCenter DecodeCenter(const Heatmap3D& heatmap) {
  const GridShape shape = heatmap.spec.shape();
  if (heatmap.scores.size() != shape.cells() || heatmap.scores.empty()) {
    throw DomainError("heatmap scores do not match the grid shape");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < heatmap.scores.size(); ++i) {
    if (heatmap.scores[i] > heatmap.scores[best]) best = i;
  }
  DecodedCenter out;
  out.score = heatmap.scores[best];
  if (!(out.score > 0.0)) {
    out.no_peak = true;
    out.score = 0.0;
    best = 0;
  }
  const auto per_x = static_cast<std::size_t>(shape.ny) * shape.nz;
  out.cell = {static_cast<int>(best / per_x),
              static_cast<int>((best % per_x) / static_cast<std::size_t>(shape.nz)),
              static_cast<int>(best % static_cast<std::size_t>(shape.nz))};
  out.center = heatmap.spec.CellCenter(out.cell);
  return out;
}

double SmoothL1(std::span<const double> pred, std::span<const double> target, double beta) {
  if (pred.size() != target.size()) {
    throw DomainError(fmt::format("smooth L1 shape mismatch: {} vs {}", pred.size(),
                                  target.size()));
  }
  if (!(beta > 0.0)) throw DomainError(fmt::format("beta must be > 0, got {}", beta));
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = std::abs(pred[i] - target[i]);
    sum += d < beta ? 0.5 * d * d / beta : d - 0.5 * beta;
  }
  return sum / static_cast<double>(pred.size());
}

}  // namespace ocm3d
