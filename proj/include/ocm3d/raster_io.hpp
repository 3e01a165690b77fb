#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ocm3d/image.hpp"
#include "ocm3d/types.hpp"

namespace ocm3d {

struct Raster16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> values;
};

// Strict: throws FormatError unless the PNG is 16-bit single channel.
Raster16 DecodeGray16Png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> EncodeGray16Png(const Raster16& raster);

// Accepts 8/16-bit gray, gray+alpha, RGB or RGBA; alpha is dropped.
RgbImage DecodeRgbPng(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> EncodeRgbPng(const RgbImage& image);

// Reads only the header.
ImageSize PngSize(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> ReadBinaryFile(const std::string& path);
std::string ReadTextFile(const std::string& path);
void WriteBinaryFile(const std::string& path, std::span<const std::uint8_t> bytes);
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace ocm3d
