#include "ocm3d/orientation_prep.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "ocm3d/angles.hpp"
#include "ocm3d/errors.hpp"

namespace ocm3d {
namespace {

// Ties closer than this are resolved to the lower bin index.
constexpr double kBinTieTolerance = 1e-12;

void CheckTarget(int width, int height) {
  if (width < 1 || height < 1) {
    throw DomainError(fmt::format("target size must be at least 1x1, got {}x{}", width,
                                  height));
  }
}

}  // namespace

Patch::Patch(int w, int h, double fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {
  CheckTarget(w, h);
}

Patch CropPatch(const PixelSource& image, int left, int top, int right, int bottom) {
  left = std::max(left, 0);
  top = std::max(top, 0);
  right = std::min(right, image.width());
  bottom = std::min(bottom, image.height());
  if (left >= right || top >= bottom) throw DomainError("crop region is empty");
  Patch patch(right - left, bottom - top);
  for (int y = top; y < bottom; ++y) {
    for (int x = left; x < right; ++x) {
      const Rgb c = image.at(x, y);
      patch.at(x - left, y - top, 0) = c.r;
      patch.at(x - left, y - top, 1) = c.g;
      patch.at(x - left, y - top, 2) = c.b;
    }
  }
  return patch;
}

double ResizeTransform::ToSourceX(double x) const {
  return (x - offset_x + 0.5) * source_width / content_width - 0.5;
}

double ResizeTransform::ToSourceY(double y) const {
  return (y - offset_y + 0.5) * source_height / content_height - 0.5;
}

Patch BilinearResize(const Patch& patch, int out_width, int out_height) {
  CheckTarget(out_width, out_height);
  Patch out(out_width, out_height);
  const double sx = static_cast<double>(patch.width) / out_width;
  const double sy = static_cast<double>(patch.height) / out_height;
  for (int y = 0; y < out_height; ++y) {
    const double src_y = std::clamp((y + 0.5) * sy - 0.5, 0.0, patch.height - 1.0);
    const int y0 = static_cast<int>(std::floor(src_y));
    const int y1 = std::min(y0 + 1, patch.height - 1);
    const double fy = src_y - y0;
    for (int x = 0; x < out_width; ++x) {
      const double src_x = std::clamp((x + 0.5) * sx - 0.5, 0.0, patch.width - 1.0);
      const int x0 = static_cast<int>(std::floor(src_x));
      const int x1 = std::min(x0 + 1, patch.width - 1);
      const double fx = src_x - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = patch.at(x0, y0, c) * (1.0 - fx) + patch.at(x1, y0, c) * fx;
        const double bot = patch.at(x0, y1, c) * (1.0 - fx) + patch.at(x1, y1, c) * fx;
        out.at(x, y, c) = top * (1.0 - fy) + bot * fy;
      }
    }
  }
  return out;
}

Patch NaiveResize(const Patch& patch, int target_width, int target_height) {
  return BilinearResize(patch, target_width, target_height);
}

ResizedPatch ShapeRetainingResize(const Patch& patch, int target_width, int target_height) {
  CheckTarget(target_width, target_height);
  ResizeTransform t;
  t.source_width = patch.width;
  t.source_height = patch.height;
  t.scale = std::min(static_cast<double>(target_width) / patch.width,
                     static_cast<double>(target_height) / patch.height);
  t.content_width = std::clamp(static_cast<int>(std::lround(t.scale * patch.width)), 1,
                               target_width);
  t.content_height = std::clamp(static_cast<int>(std::lround(t.scale * patch.height)), 1,
                                target_height);
  t.offset_x = (target_width - t.content_width) / 2;
  t.offset_y = (target_height - t.content_height) / 2;

  const Patch content = BilinearResize(patch, t.content_width, t.content_height);
  ResizedPatch out{Patch(target_width, target_height, 0.0), t};
  for (int y = 0; y < t.content_height; ++y) {
    for (int x = 0; x < t.content_width; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.patch.at(x + t.offset_x, y + t.offset_y, c) = content.at(x, y, c);
      }
    }
  }
  return out;
}

double BinCenter(int bin_index, int n_bins) {
  return 2.0 * kPi * bin_index / n_bins;
}

BinEncoding MultibinEncode(double alpha, int n_bins) {
  if (n_bins < 2) throw DomainError(fmt::format("need at least 2 bins, got {}", n_bins));
  const double a = WrapAngle(alpha);
  int best = 0;
  double best_distance = AngularDistance(a, BinCenter(0, n_bins));
  for (int k = 1; k < n_bins; ++k) {
    const double d = AngularDistance(a, BinCenter(k, n_bins));
    if (d < best_distance - kBinTieTolerance) {
      best = k;
      best_distance = d;
    }
  }
  return {n_bins, best, WrapAngle(a - BinCenter(best, n_bins))};
}

double MultibinDecode(const BinEncoding& encoding) {
  if (encoding.n_bins < 2 || encoding.bin_index < 0 ||
      encoding.bin_index >= encoding.n_bins) {
    throw DomainError(fmt::format("invalid bin {} of {}", encoding.bin_index,
                                  encoding.n_bins));
  }
  return WrapAngle(BinCenter(encoding.bin_index, encoding.n_bins) + encoding.residual);
}

}  // namespace ocm3d
