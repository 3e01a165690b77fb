#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ocm3d {

// Channel values in [0, 1].
struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Anything that can hand out a color per integer pixel.
class PixelSource {
 public:
  virtual ~PixelSource() = default;
  virtual int width() const = 0;
  virtual int height() const = 0;
  virtual Rgb at(int u, int v) const = 0;
};

// Dense row-major RGB grid.
class RgbImage final : public PixelSource {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {});

  int width() const override { return width_; }
  int height() const override { return height_; }
  Rgb at(int u, int v) const override { return pixels_[Index(u, v)]; }
  void Set(int u, int v, Rgb color) { pixels_[Index(u, v)] = color; }

 private:
  std::size_t Index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> pixels_;
};

}  // namespace ocm3d
