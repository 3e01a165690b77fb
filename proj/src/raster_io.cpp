#include "ocm3d/raster_io.hpp"

#include <fmt/format.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ocm3d/errors.hpp"

namespace ocm3d {
namespace {

constexpr std::size_t kSignatureBytes = 8;

struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t offset;
};

struct ErrorSink {
  char message[256];
};

void OnPngError(png_structp png, png_const_charp message) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof(sink->message), "%s", message);
  png_longjmp(png, 1);
}

void OnPngWarning(png_structp, png_const_charp) {}

void ReadFromMemory(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->size) {
    png_error(png, "truncated PNG stream");
  }
  std::memcpy(out, cursor->data + cursor->offset, length);
  cursor->offset += length;
}

void WriteToVector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void FlushNothing(png_structp) {}

void CheckSignature(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSignatureBytes || png_sig_cmp(bytes.data(), 0, kSignatureBytes) != 0) {
    throw FormatError("not a PNG stream");
  }
}

enum class DecodeKind { kGray16, kRgb8, kHeaderOnly };

struct Decoded {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<std::uint8_t> rows;  // tightly packed decoded rows
  std::size_t row_bytes = 0;
};

// Returns false with `sink` filled on libpng failure. Only trivially
// destructible locals live between setjmp and any longjmp.
bool DecodeRaw(std::span<const std::uint8_t> bytes, DecodeKind kind, Decoded& out,
               ErrorSink& sink, bool& wrong_format) {
  ReadCursor cursor{bytes.data(), bytes.size(), 0};
  std::vector<png_bytep> pointers;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, OnPngError,
                                           OnPngWarning);
  if (png == nullptr) {
    std::snprintf(sink.message, sizeof(sink.message), "png_create_read_struct failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    std::snprintf(sink.message, sizeof(sink.message), "png_create_info_struct failed");
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &cursor, ReadFromMemory);
  png_read_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  out.color_type = png_get_color_type(png, info);

  if (kind == DecodeKind::kHeaderOnly) {
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
  }
  if (kind == DecodeKind::kGray16) {
    if (out.bit_depth != 16 || out.color_type != PNG_COLOR_TYPE_GRAY) {
      wrong_format = true;
      png_destroy_read_struct(&png, &info, nullptr);
      return true;
    }
  } else {
    if (out.color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (out.color_type == PNG_COLOR_TYPE_GRAY && out.bit_depth < 8) {
      png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (out.bit_depth == 16) png_set_strip_16(png);
    if (out.color_type == PNG_COLOR_TYPE_GRAY ||
        out.color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
      png_set_gray_to_rgb(png);
    }
    png_set_strip_alpha(png);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  out.row_bytes = png_get_rowbytes(png, info);
  out.rows.resize(out.row_bytes * static_cast<std::size_t>(out.height));
  pointers.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) {
    pointers[static_cast<std::size_t>(y)] =
        out.rows.data() + static_cast<std::size_t>(y) * out.row_bytes;
  }
  png_read_image(png, pointers.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

Decoded Decode(std::span<const std::uint8_t> bytes, DecodeKind kind) {
  CheckSignature(bytes);
  Decoded decoded;
  ErrorSink sink{};
  bool wrong_format = false;
  if (!DecodeRaw(bytes, kind, decoded, sink, wrong_format)) {
    throw FormatError(fmt::format("PNG decode failed: {}", sink.message));
  }
  if (wrong_format) {
    const int channels = decoded.color_type == PNG_COLOR_TYPE_GRAY         ? 1
                         : decoded.color_type == PNG_COLOR_TYPE_GRAY_ALPHA ? 2
                         : decoded.color_type == PNG_COLOR_TYPE_RGB        ? 3
                         : decoded.color_type == PNG_COLOR_TYPE_RGB_ALPHA  ? 4
                                                                           : 1;
    throw FormatError(fmt::format(
        "depth raster must be 16-bit single channel, got {}-bit with {} channel(s)",
        decoded.bit_depth, channels));
  }
  return decoded;
}

std::vector<std::uint8_t> Encode(int width, int height, int bit_depth, int color_type,
                                 const std::vector<std::uint8_t>& rows,
                                 std::size_t row_bytes) {
  std::vector<std::uint8_t> out;
  ErrorSink sink{};
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, OnPngError,
                                            OnPngWarning);
  if (png == nullptr) throw FormatError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("png_create_info_struct failed");
  }
  std::vector<png_bytep> pointers(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    pointers[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(rows.data() + static_cast<std::size_t>(y) * row_bytes);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError(fmt::format("PNG encode failed: {}", sink.message));
  }
  png_set_write_fn(png, &out, WriteToVector, FlushNothing);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, pointers.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

RgbImage::RgbImage(int width, int height, Rgb fill)
    : width_(width),
      height_(height),
      pixels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

Raster16 DecodeGray16Png(std::span<const std::uint8_t> bytes) {
  const Decoded d = Decode(bytes, DecodeKind::kGray16);
  Raster16 raster;
  raster.width = d.width;
  raster.height = d.height;
  raster.values.resize(static_cast<std::size_t>(d.width) * d.height);
  for (int y = 0; y < d.height; ++y) {
    const std::uint8_t* row = d.rows.data() + static_cast<std::size_t>(y) * d.row_bytes;
    for (int x = 0; x < d.width; ++x) {
      raster.values[static_cast<std::size_t>(y) * d.width + x] =
          static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
    }
  }
  return raster;
}

std::vector<std::uint8_t> EncodeGray16Png(const Raster16& raster) {
  const std::size_t row_bytes = static_cast<std::size_t>(raster.width) * 2;
  std::vector<std::uint8_t> rows(row_bytes * raster.height);
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    rows[2 * i] = static_cast<std::uint8_t>(raster.values[i] >> 8);
    rows[2 * i + 1] = static_cast<std::uint8_t>(raster.values[i] & 0xff);
  }
  return Encode(raster.width, raster.height, 16, PNG_COLOR_TYPE_GRAY, rows, row_bytes);
}

RgbImage DecodeRgbPng(std::span<const std::uint8_t> bytes) {
  const Decoded d = Decode(bytes, DecodeKind::kRgb8);
  RgbImage image(d.width, d.height);
  for (int y = 0; y < d.height; ++y) {
    const std::uint8_t* row = d.rows.data() + static_cast<std::size_t>(y) * d.row_bytes;
    for (int x = 0; x < d.width; ++x) {
      image.Set(x, y, Rgb{row[3 * x] / 255.0, row[3 * x + 1] / 255.0, row[3 * x + 2] / 255.0});
    }
  }
  return image;
}

std::vector<std::uint8_t> EncodeRgbPng(const RgbImage& image) {
  const std::size_t row_bytes = static_cast<std::size_t>(image.width()) * 3;
  std::vector<std::uint8_t> rows(row_bytes * image.height());
  auto to_byte = [](double c) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
  };
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const Rgb c = image.at(x, y);
      std::uint8_t* px = rows.data() + static_cast<std::size_t>(y) * row_bytes + 3 * x;
      px[0] = to_byte(c.r);
      px[1] = to_byte(c.g);
      px[2] = to_byte(c.b);
    }
  }
  return Encode(image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, rows, row_bytes);
}

ImageSize PngSize(std::span<const std::uint8_t> bytes) {
  const Decoded d = Decode(bytes, DecodeKind::kHeaderOnly);
  return {d.width, d.height};
}

std::vector<std::uint8_t> ReadBinaryFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open {}", path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open {}", path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteBinaryFile(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(fmt::format("cannot write {}", path));
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(fmt::format("short write to {}", path));
}

void WriteTextFile(const std::string& path, const std::string& text) {
  WriteBinaryFile(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                  text.size()));
}

}  // namespace ocm3d
