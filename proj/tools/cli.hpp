#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ocm3d/voxelizer.hpp"

namespace ocm3d::cli {

// Everything a subcommand may consume. Numeric defaults match the published
// configuration: grid (32, 16, 64), lambda 80.
struct RunConfig {
  std::string calib_dir;
  std::string labels_dir;
  std::string detections_dir;
  std::string depth_dir;
  std::string image_dir;
  std::string output;
  std::string mapping;
  std::string val_frames;
  std::string scenes;
  std::string train_scenes;
  std::string val_scenes;
  std::string pr_out;
  std::string frame;

  GridShape shape;
  GridMode mode = GridMode::kPointAware;
  double lambda = 80.0;
  double outlier_margin = kDefaultOutlierMargin;
  double heatmap_radius = 2.0;
  bool frustum_rotate = true;
  bool clip = true;
  int jobs = 1;

  std::vector<std::string> classes{"Car"};
  std::vector<std::string> metrics{"r11", "r40"};
  std::vector<double> iou_thresholds;
  std::string image_size = "1242x375";
};

// Exit status: 0 success, 1 validation/format error, 2 usage error.
// Results go to `out`; diagnostics go to stderr.
int Run(const std::vector<std::string>& args, std::ostream& out);
int Run(int argc, const char* const* argv);

}  // namespace ocm3d::cli
