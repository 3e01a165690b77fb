#pragma once

#include <vector>

#include "ocm3d/image.hpp"

namespace ocm3d {

// Row-major h x w x 3 grid in [0, 1].
struct Patch {
  int width = 1;
  int height = 1;
  std::vector<double> pixels;

  Patch() : pixels(3, 0.0) {}
  Patch(int w, int h, double fill = 0.0);

  double at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  double& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

// Crops [left, right) x [top, bottom) (integer pixels, clamped to the image).
Patch CropPatch(const PixelSource& image, int left, int top, int right, int bottom);

// Where the resized content landed inside the output.
struct ResizeTransform {
  double scale = 1.0;     // uniform scale min(W/w, H/h)
  int content_width = 0;  // round(scale * w)
  int content_height = 0;
  int offset_x = 0;       // left padding
  int offset_y = 0;       // top padding
  int source_width = 0;
  int source_height = 0;

  // Output pixel coordinate -> source patch coordinate.
  double ToSourceX(double x) const;
  double ToSourceY(double y) const;
};

struct ResizedPatch {
  Patch patch;
  ResizeTransform transform;
};

// Aspect-preserving fit of the larger edge plus symmetric zero padding; an odd
// padding remainder goes right/bottom.
ResizedPatch ShapeRetainingResize(const Patch& patch, int target_width,
                                  int target_height);

// Plain stretch to the target size, kept for comparison.
Patch NaiveResize(const Patch& patch, int target_width, int target_height);

// Half-pixel-center bilinear resample of the whole patch.
Patch BilinearResize(const Patch& patch, int out_width, int out_height);

inline constexpr int kDefaultBins = 2;

struct BinEncoding {
  int n_bins = kDefaultBins;
  int bin_index = 0;
  double residual = 0.0;
};

double BinCenter(int bin_index, int n_bins);

// Nearest bin center (2*pi*k/n), ties to the lower index.
BinEncoding MultibinEncode(double alpha, int n_bins = kDefaultBins);
// Wrapped to (-pi, pi].
double MultibinDecode(const BinEncoding& encoding);

}  // namespace ocm3d
