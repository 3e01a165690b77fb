#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ocm3d/types.hpp"

namespace ocm3d {

// Reads the "P2:" entry of a KITTI calibration file.
CameraCalib ParseCalibration(std::string_view text);

// One record per non-blank line. With `expect_score`, every row must carry
// the 16th (score) column; without it the score is read when present.
std::vector<ObjectRecord> ParseObjects(std::string_view text,
                                       bool expect_score = false);

// KITTI text rows. Angles, boxes, dims and location use 2 decimals, score 6.
// DontCare rows are emitted with the conventional placeholder 3D fields.
std::string WriteObjects(const std::vector<ObjectRecord>& records);

// Throws ValidationError for a non-DontCare record with non-positive dims
// or an inverted 2D box.
void ValidateRecord(const ObjectRecord& record);

class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height);

  // Raw KITTI depth values; 0 marks an invalid pixel.
  static DepthMap FromRaw(int width, int height,
                          std::span<const std::uint16_t> stored);

  int width() const { return width_; }
  int height() const { return height_; }
  bool valid(int u, int v) const { return valid_[Index(u, v)] != 0; }
  // Meters. Only meaningful where valid().
  double at(int u, int v) const { return values_[Index(u, v)]; }

  void Set(int u, int v, double meters);
  void Invalidate(int u, int v);
  std::size_t CountValid() const;

 private:
  std::size_t Index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> valid_;
};

inline constexpr double kDepthScale = 256.0;

// Decodes a 16-bit single-channel PNG; depth = stored / 256, 0 = invalid.
DepthMap LoadDepthMap(std::span<const std::uint8_t> png_bytes);

struct SplitSpec {
  std::set<std::string> depth_train_scenes;
  std::set<std::string> depth_val_scenes;
  std::set<int> detection_val_frames;
  // Set when every scene is touched by validation frames.
  bool train_empty_warning = false;
};

using FrameSceneMap = std::map<int, std::string>;

// Removes from depth training every scene that contributes a frame to the
// detection validation set. `extra_scenes` widens the scene universe beyond
// the ones named by the mapping.
SplitSpec GenerateDepthSplit(const FrameSceneMap& frame_to_scene,
                             const std::set<int>& detection_val_frames,
                             const std::set<std::string>& extra_scenes = {});

// Returns an empty list when the split is leak-free; otherwise one message per
// violation.
std::vector<std::string> CheckSplit(const FrameSceneMap& frame_to_scene,
                                    const std::set<int>& detection_val_frames,
                                    const std::set<std::string>& train_scenes,
                                    const std::set<std::string>& val_scenes);

// "frame scene" per line; '#' starts a comment.
FrameSceneMap ParseFrameSceneMap(std::string_view text);
// Integer frame ids, one per line (leading zeros allowed).
std::set<int> ParseFrameList(std::string_view text);
// Whitespace-free tokens, one per line.
std::set<std::string> ParseSceneList(std::string_view text);
std::string WriteSceneList(const std::set<std::string>& scenes);

}  // namespace ocm3d
