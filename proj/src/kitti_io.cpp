#include "ocm3d/kitti_io.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "ocm3d/errors.hpp"
#include "ocm3d/raster_io.hpp"

namespace ocm3d {
namespace {

struct Token {
  std::string_view text;
  int column = 0;  // 1-based
};

std::vector<Token> Tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    tokens.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return tokens;
}

// Splits on '\n', dropping a trailing '\r'. Lines keep their 1-based number.
template <typename Fn>
void ForEachLine(std::string_view text, Fn&& fn) {
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, end == std::string_view::npos ? std::string_view::npos
                                                       : end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number;
    fn(line, number);
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
}

double ToDouble(const Token& token, int line) {
  double value = 0.0;
  std::string_view text = token.text;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(fmt::format("line {}, column {}: expected a number, got '{}'",
                                 line, token.column, token.text),
                     line, token.column);
  }
  return value;
}

int ToInt(const Token& token, int line) {
  int value = 0;
  const auto* first = token.text.data();
  const auto* last = first + token.text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc() && ptr == last) return value;
  // Some writers emit the occlusion flag as a float ("0.00").
  const double as_double = ToDouble(token, line);
  if (as_double != std::floor(as_double)) {
    throw ParseError(fmt::format("line {}, column {}: expected an integer, got '{}'",
                                 line, token.column, token.text),
                     line, token.column);
  }
  return static_cast<int>(as_double);
}

bool IsBlank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string_view StripComment(std::string_view line) {
  const auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

}  // namespace

double Box2D::area() const {
  return std::max(0.0, right - left) * std::max(0.0, bottom - top);
}

CameraCalib CameraCalib::FromIntrinsics(double fx, double fy, double cx, double cy,
                                        double tx, double ty) {
  CameraCalib c;
  c.p = {{{fx, 0.0, cx, tx}, {0.0, fy, cy, ty}, {0.0, 0.0, 1.0, 0.0}}};
  return c;
}

CameraCalib ParseCalibration(std::string_view text) {
  std::optional<CameraCalib> calib;
  ForEachLine(text, [&](std::string_view line, int number) {
    if (calib) return;
    const auto tokens = Tokenize(line);
    if (tokens.empty() || tokens.front().text != "P2:") return;
    if (tokens.size() != 13) {
      throw FormatError(fmt::format("line {}: P2 needs 12 values, found {}", number,
                                    tokens.size() - 1));
    }
    CameraCalib c;
    for (int i = 0; i < 12; ++i) {
      c.p[i / 4][i % 4] = ToDouble(tokens[i + 1], number);
    }
    calib = c;
  });
  if (!calib) throw FormatError("calibration is missing the 'P2:' key");
  if (!(calib->fx() > 0.0) || !(calib->fy() > 0.0)) {
    throw FormatError(fmt::format("P2 has non-positive focal length (fx={}, fy={})",
                                  calib->fx(), calib->fy()));
  }
  return *calib;
}

std::vector<ObjectRecord> ParseObjects(std::string_view text, bool expect_score) {
  std::vector<ObjectRecord> records;
  ForEachLine(text, [&](std::string_view line, int number) {
    if (IsBlank(line)) return;
    const auto t = Tokenize(line);
    if (t.size() == 15 && expect_score) {
      throw FormatError(fmt::format("line {}: detection row has no score", number));
    }
    if (t.size() != 15 && t.size() != 16) {
      throw ParseError(fmt::format("line {}: expected 15 or 16 fields, found {}",
                                   number, t.size()),
                       number);
    }
    ObjectRecord r;
    r.class_name = std::string(t[0].text);
    r.truncation = ToDouble(t[1], number);
    r.occlusion = ToInt(t[2], number);
    r.alpha = ToDouble(t[3], number);
    r.box2d = {ToDouble(t[4], number), ToDouble(t[5], number), ToDouble(t[6], number),
               ToDouble(t[7], number)};
    r.dims = {ToDouble(t[8], number), ToDouble(t[9], number), ToDouble(t[10], number)};
    r.location = {ToDouble(t[11], number), ToDouble(t[12], number),
                  ToDouble(t[13], number)};
    r.rotation_y = ToDouble(t[14], number);
    if (t.size() == 16) r.score = ToDouble(t[15], number);
    records.push_back(std::move(r));
  });
  return records;
}

void ValidateRecord(const ObjectRecord& record) {
  if (record.is_dont_care()) return;
  const Dims& d = record.dims;
  if (!(d.h > 0.0 && d.w > 0.0 && d.l > 0.0)) {
    throw ValidationError(fmt::format("{} has non-positive dimensions ({}, {}, {})",
                                      record.class_name, d.h, d.w, d.l));
  }
  if (!(record.box2d.left <= record.box2d.right &&
        record.box2d.top <= record.box2d.bottom)) {
    throw ValidationError(fmt::format("{} has an inverted 2D box", record.class_name));
  }
}

std::string WriteObjects(const std::vector<ObjectRecord>& records) {
  std::string out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const ObjectRecord& r = records[i];
    try {
      ValidateRecord(r);
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("record {}: {}", i + 1, e.what()));
    }
    const Dims d = r.is_dont_care() ? Dims{-1.0, -1.0, -1.0} : r.dims;
    fmt::format_to(std::back_inserter(out),
                   "{} {:.2f} {} {:.2f} {:.2f} {:.2f} {:.2f} {:.2f} {:.2f} {:.2f} "
                   "{:.2f} {:.2f} {:.2f} {:.2f} {:.2f}",
                   r.class_name, r.truncation, r.occlusion, r.alpha, r.box2d.left,
                   r.box2d.top, r.box2d.right, r.box2d.bottom, d.h, d.w, d.l,
                   r.location.x, r.location.y, r.location.z, r.rotation_y);
    if (r.score) fmt::format_to(std::back_inserter(out), " {:.6f}", *r.score);
    out += '\n';
  }
  return out;
}

DepthMap::DepthMap(int width, int height)
    : width_(width),
      height_(height),
      values_(static_cast<std::size_t>(width) * height, 0.0),
      valid_(static_cast<std::size_t>(width) * height, 0) {
  if (width < 0 || height < 0) throw DomainError("negative depth map size");
}

DepthMap DepthMap::FromRaw(int width, int height,
                           std::span<const std::uint16_t> stored) {
  if (stored.size() != static_cast<std::size_t>(width) * height) {
    throw FormatError(fmt::format("depth payload has {} values, expected {}x{}",
                                  stored.size(), width, height));
  }
  DepthMap map(width, height);
  for (std::size_t i = 0; i < stored.size(); ++i) {
    if (stored[i] == 0) continue;
    map.values_[i] = static_cast<double>(stored[i]) / kDepthScale;
    map.valid_[i] = 1;
  }
  return map;
}

void DepthMap::Set(int u, int v, double meters) {
  if (!(meters > 0.0)) {
    Invalidate(u, v);
    return;
  }
  values_[Index(u, v)] = meters;
  valid_[Index(u, v)] = 1;
}

void DepthMap::Invalidate(int u, int v) {
  values_[Index(u, v)] = 0.0;
  valid_[Index(u, v)] = 0;
}

std::size_t DepthMap::CountValid() const {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), 1));
}

DepthMap LoadDepthMap(std::span<const std::uint8_t> png_bytes) {
  const Raster16 raster = DecodeGray16Png(png_bytes);
  return DepthMap::FromRaw(raster.width, raster.height, raster.values);
}

SplitSpec GenerateDepthSplit(const FrameSceneMap& frame_to_scene,
                             const std::set<int>& detection_val_frames,
                             const std::set<std::string>& extra_scenes) {
  std::vector<int> unmapped;
  SplitSpec split;
  split.detection_val_frames = detection_val_frames;
  for (int frame : detection_val_frames) {
    const auto it = frame_to_scene.find(frame);
    if (it == frame_to_scene.end()) {
      unmapped.push_back(frame);
      continue;
    }
    split.depth_val_scenes.insert(it->second);
  }
  if (!unmapped.empty()) {
    throw ConsistencyError(fmt::format("validation frames without a scene: {}",
                                       fmt::join(unmapped, ", ")));
  }
  std::set<std::string> all = extra_scenes;
  for (const auto& [frame, scene] : frame_to_scene) all.insert(scene);
  for (const auto& scene : all) {
    if (!split.depth_val_scenes.contains(scene)) split.depth_train_scenes.insert(scene);
  }
  split.train_empty_warning = split.depth_train_scenes.empty();
  return split;
}

std::vector<std::string> CheckSplit(const FrameSceneMap& frame_to_scene,
                                    const std::set<int>& detection_val_frames,
                                    const std::set<std::string>& train_scenes,
                                    const std::set<std::string>& val_scenes) {
  std::vector<std::string> problems;
  for (const auto& scene : train_scenes) {
    if (val_scenes.contains(scene)) {
      problems.push_back(fmt::format("scene {} is in both depth splits", scene));
    }
  }
  for (int frame : detection_val_frames) {
    const auto it = frame_to_scene.find(frame);
    if (it == frame_to_scene.end()) {
      problems.push_back(fmt::format("validation frame {} has no scene", frame));
    } else if (train_scenes.contains(it->second)) {
      problems.push_back(fmt::format(
          "validation frame {} comes from depth training scene {}", frame, it->second));
    }
  }
  return problems;
}

FrameSceneMap ParseFrameSceneMap(std::string_view text) {
  FrameSceneMap mapping;
  ForEachLine(text, [&](std::string_view raw, int number) {
    const auto t = Tokenize(StripComment(raw));
    if (t.empty()) return;
    if (t.size() != 2) {
      throw ParseError(
          fmt::format("line {}: expected 'frame scene', found {} fields", number, t.size()),
          number);
    }
    const int frame = ToInt(t[0], number);
    const auto [it, inserted] = mapping.emplace(frame, std::string(t[1].text));
    if (!inserted && it->second != t[1].text) {
      throw ConsistencyError(fmt::format("line {}: frame {} mapped to both {} and {}",
                                         number, frame, it->second, t[1].text));
    }
  });
  return mapping;
}

std::set<int> ParseFrameList(std::string_view text) {
  std::set<int> frames;
  ForEachLine(text, [&](std::string_view raw, int number) {
    const auto t = Tokenize(StripComment(raw));
    if (t.empty()) return;
    if (t.size() != 1) {
      throw ParseError(fmt::format("line {}: expected one frame id", number), number);
    }
    frames.insert(ToInt(t[0], number));
  });
  return frames;
}

std::set<std::string> ParseSceneList(std::string_view text) {
  std::set<std::string> scenes;
  ForEachLine(text, [&](std::string_view raw, int number) {
    const auto t = Tokenize(StripComment(raw));
    if (t.empty()) return;
    if (t.size() != 1) {
      throw ParseError(fmt::format("line {}: expected one scene id", number), number);
    }
    scenes.emplace(t[0].text);
  });
  return scenes;
}

std::string WriteSceneList(const std::set<std::string>& scenes) {
  std::string out;
  for (const auto& scene : scenes) {
    out += scene;
    out += '\n';
  }
  return out;
}

}  // namespace ocm3d
