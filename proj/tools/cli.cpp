#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "ocm3d/confidence.hpp"
#include "ocm3d/errors.hpp"
#include "ocm3d/eval.hpp"
#include "ocm3d/geometry.hpp"
#include "ocm3d/grid_io.hpp"
#include "ocm3d/heatmap.hpp"
#include "ocm3d/kitti_io.hpp"
#include "ocm3d/raster_io.hpp"

namespace ocm3d::cli {
namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

// Config keys that map onto --key / --no-key flag pairs.
const std::set<std::string> kBooleanKeys = {"clip", "rotate"};

std::shared_ptr<spdlog::logger> Log() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = std::make_shared<spdlog::logger>(
        "ocm3d", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("%l: %v");
    l->set_level(spdlog::level::info);
    if (const char* env = std::getenv("OCM3D_LOG_LEVEL")) {
      l->set_level(spdlog::level::from_str(env));
    }
    return l;
  }();
  return logger;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Rethrows the failure
// with the lowest index so errors do not depend on scheduling.
template <typename Fn>
void ParallelFor(std::size_t n, int jobs, Fn&& fn) {
  std::vector<std::exception_ptr> failures(n);
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    for (std::size_t w = 0; w < count; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) guarded(i);
      });
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

// Sorted stems of the *.txt files in `dir`.
std::vector<std::string> ListFrames(const std::string& dir) {
  std::vector<std::string> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      frames.push_back(entry.path().stem().string());
    }
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

std::string FramePath(const std::string& dir, const std::string& frame,
                      const std::string& ext) {
  return (fs::path(dir) / (frame + ext)).string();
}

void RequireFile(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) {
    throw ConsistencyError(fmt::format("missing {} file {}", what, path));
  }
}

GridShape ParseShape(const std::string& text) {
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), 'x', ',');
  std::istringstream in(normalized);
  GridShape shape;
  char c1 = 0;
  char c2 = 0;
  if (!(in >> shape.nx >> c1 >> shape.ny >> c2 >> shape.nz) || c1 != ',' || c2 != ',' ||
      shape.nx < 1 || shape.ny < 1 || shape.nz < 1) {
    throw CLI::ValidationError("--shape", "expected NX,NY,NZ with positive sizes");
  }
  return shape;
}

ImageSize ParseImageSize(const std::string& text) {
  ImageSize size;
  char sep = 0;
  std::istringstream in(text);
  if (!(in >> size.width >> sep >> size.height) || sep != 'x' || size.width < 1 ||
      size.height < 1) {
    throw ValidationError(fmt::format("bad image size '{}', expected WxH", text));
  }
  return size;
}

// Fills pixels with black when no image is supplied.
class BlankPixels final : public PixelSource {
 public:
  BlankPixels(int w, int h) : w_(w), h_(h) {}
  int width() const override { return w_; }
  int height() const override { return h_; }
  Rgb at(int, int) const override { return {}; }

 private:
  int w_;
  int h_;
};

// ---------------------------------------------------------------------------
// Subcommands

int RunVoxelize(const RunConfig& cfg, std::ostream& out, bool heatmaps) {
  fs::create_directories(cfg.output);
  std::vector<std::string> frames = ListFrames(cfg.labels_dir);
  if (!cfg.frame.empty()) {
    std::erase_if(frames, [&](const std::string& f) { return f != cfg.frame; });
    if (frames.empty()) throw ConsistencyError(fmt::format("no label file for frame {}", cfg.frame));
  }
  VoxelizeOptions options;
  options.shape = cfg.shape;
  options.mode = cfg.mode;
  options.outlier_margin = cfg.outlier_margin;
  options.frustum_rotate = cfg.frustum_rotate;

  std::vector<std::string> reports(frames.size());
  std::atomic<std::size_t> done{0};
  ParallelFor(frames.size(), cfg.jobs, [&](std::size_t i) {
    const std::string& frame = frames[i];
    const CameraCalib calib =
        ParseCalibration(ReadTextFile(FramePath(cfg.calib_dir, frame, ".txt")));
    const DepthMap depth = LoadDepthMap(ReadBinaryFile(FramePath(cfg.depth_dir, frame, ".png")));
    std::unique_ptr<PixelSource> rgb;
    if (!heatmaps) {
      auto image = std::make_unique<RgbImage>(
          DecodeRgbPng(ReadBinaryFile(FramePath(cfg.image_dir, frame, ".png"))));
      rgb = std::move(image);
    } else {
      rgb = std::make_unique<BlankPixels>(depth.width(), depth.height());
    }
    const auto objects =
        ParseObjects(ReadTextFile(FramePath(cfg.labels_dir, frame, ".txt")), false);
    std::string report;
    for (std::size_t k = 0; k < objects.size(); ++k) {
      const ObjectRecord& obj = objects[k];
      if (obj.is_dont_care()) continue;
      const std::string stem = fmt::format("{}_{:02}", frame, k);
      ObjectVoxels voxels;
      try {
        voxels = VoxelizeObject(depth, *rgb, obj.box2d, calib, options);
      } catch (const DomainError& e) {
        Log()->warn("frame {} object {}: skipped ({})", frame, k, e.what());
        continue;
      }
      if (voxels.degenerate_cloud) {
        Log()->warn("frame {} object {}: degenerate cloud after outlier removal", frame, k);
      }
      if (!heatmaps) {
        WriteBinaryFile((fs::path(cfg.output) / (stem + ".ocmv")).string(),
                        EncodeVoxelGrid(voxels.grid));
        fmt::format_to(std::back_inserter(report), "{} {} points={} outliers={}\n{}", stem,
                       obj.class_name, voxels.cloud.size(), voxels.outliers_removed,
                       SummarizeVoxelGrid(voxels.grid));
        continue;
      }
      Point3 center{obj.location.x, obj.location.y - obj.dims.h / 2.0, obj.location.z};
      if (cfg.frustum_rotate) center = RotateIntoFrustum(center, voxels.frustum_angle);
      const Heatmap3D target = HeatmapTarget(voxels.grid.spec, center, cfg.heatmap_radius);
      WriteBinaryFile((fs::path(cfg.output) / (stem + ".ocmh")).string(),
                      EncodeHeatmap(target));
      const DecodedCenter decoded = DecodeCenter(target);
      fmt::format_to(std::back_inserter(report),
                     "{} {} peak_cell=({},{},{}) center=({:.3f},{:.3f},{:.3f})\n", stem,
                     obj.class_name, decoded.cell[0], decoded.cell[1], decoded.cell[2],
                     decoded.center.x, decoded.center.y, decoded.center.z);
    }
    reports[i] = std::move(report);
    Log()->debug("processed {} of {} frames", ++done, frames.size());
  });
  for (const auto& r : reports) out << r;
  return kExitOk;
}

int RunRescore(const RunConfig& cfg, std::ostream& out) {
  fs::create_directories(cfg.output);
  const std::vector<std::string> frames = ListFrames(cfg.detections_dir);
  RescoreConfig base;
  base.lambda = cfg.lambda;
  base.clip_projection = cfg.clip;
  base.image_size = ParseImageSize(cfg.image_size);
  for (const auto& frame : frames) RequireFile(FramePath(cfg.calib_dir, frame, ".txt"), "calibration");

  std::vector<std::size_t> behind(frames.size(), 0);
  ParallelFor(frames.size(), cfg.jobs, [&](std::size_t i) {
    const std::string& frame = frames[i];
    RescoreConfig rc = base;
    if (!cfg.image_dir.empty()) {
      rc.image_size = PngSize(ReadBinaryFile(FramePath(cfg.image_dir, frame, ".png")));
    }
    const CameraCalib calib =
        ParseCalibration(ReadTextFile(FramePath(cfg.calib_dir, frame, ".txt")));
    std::vector<ObjectRecord> dets;
    try {
      dets = ParseObjects(ReadTextFile(FramePath(cfg.detections_dir, frame, ".txt")), true);
    } catch (const Error& e) {
      throw FormatError(fmt::format("{}: {}", frame, e.what()));
    }
    RescoreStats stats;
    const auto rescored = Rescore(dets, calib, rc, &stats);
    behind[i] = stats.behind_camera;
    WriteTextFile(FramePath(cfg.output, frame, ".txt"), WriteObjects(rescored));
  });
  std::size_t total_behind = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (behind[i] > 0) {
      Log()->warn("frame {}: {} detection(s) behind the camera scored 0", frames[i], behind[i]);
    }
    total_behind += behind[i];
  }
  fmt::print(out, "rescored {} frame(s), {} detection(s) behind camera\n", frames.size(),
             total_behind);
  return kExitOk;
}

FrameObjects LoadFrames(const std::string& dir) {
  FrameObjects frames;
  for (const auto& frame : ListFrames(dir)) {
    try {
      frames[frame] = ParseObjects(ReadTextFile(FramePath(dir, frame, ".txt")), false);
    } catch (const Error& e) {
      throw FormatError(fmt::format("{}/{}.txt: {}", dir, frame, e.what()));
    }
  }
  return frames;
}

void PrintTable(std::ostream& out, const EvalResult& result, const std::string& cls,
                const std::vector<double>& thresholds, ApMode mode) {
  auto value = [&](EvalTask task, Difficulty d, double iou) {
    const EvalEntry* e = result.Find(cls, d, task, iou);
    return e ? e->ap(mode) : 0.0;
  };
  fmt::print(out, "{} AP|{}\n", cls, ApModeName(mode));
  std::string header = fmt::format("{:<10}", "");
  std::string sub = fmt::format("{:<10}", "");
  for (double iou : thresholds) {
    header += fmt::format("| {:^44}", fmt::format("IoU={:.2f}", iou));
    sub += fmt::format("| {:^14}{:^16}{:^14}", "Easy", "Moderate", "Hard");
  }
  fmt::print(out, "{}\n{}\n", header, sub);
  std::string row = fmt::format("{:<10}", "BEV/3D");
  for (double iou : thresholds) {
    row += "| ";
    for (Difficulty d : kAllDifficulties) {
      row += fmt::format("{:^15}", fmt::format("{:.4f}/{:.4f}", value(EvalTask::kBev, d, iou),
                                               value(EvalTask::k3D, d, iou)));
    }
  }
  fmt::print(out, "{}\n", row);
  row = fmt::format("{:<10}", "2D");
  std::string aos = fmt::format("{:<10}", "AOS");
  for (double iou : thresholds) {
    row += "| ";
    aos += "| ";
    for (Difficulty d : kAllDifficulties) {
      row += fmt::format("{:^15}", fmt::format("{:.4f}", value(EvalTask::k2D, d, iou)));
      const EvalEntry* e = result.Find(cls, d, EvalTask::k2D, iou);
      const double a = e ? (mode == ApMode::kR11 ? *e->aos_r11 : *e->aos_r40) : 0.0;
      aos += fmt::format("{:^15}", fmt::format("{:.4f}", a));
    }
  }
  fmt::print(out, "{}\n{}\n\n", row, aos);
}

int RunEvaluate(const RunConfig& cfg, std::ostream& out) {
  std::vector<ApMode> modes;
  for (const auto& m : cfg.metrics) {
    if (m == "r11" || m == "R11") {
      modes.push_back(ApMode::kR11);
    } else if (m == "r40" || m == "R40") {
      modes.push_back(ApMode::kR40);
    } else {
      throw ValidationError(fmt::format("unknown metric '{}', expected r11 or r40", m));
    }
  }
  const FrameObjects gts = LoadFrames(cfg.labels_dir);
  const FrameObjects dets = LoadFrames(cfg.detections_dir);
  EvalConfig ec;
  ec.classes = cfg.classes;
  ec.jobs = cfg.jobs;
  if (!cfg.iou_thresholds.empty()) {
    for (const auto& c : cfg.classes) ec.iou_thresholds[c] = cfg.iou_thresholds;
  }
  const EvalResult result = Evaluate(dets, gts, ec);
  for (const auto& cls : cfg.classes) {
    const auto it = ec.iou_thresholds.find(cls);
    const auto thresholds = it != ec.iou_thresholds.end() ? it->second : DefaultIouThresholds(cls);
    for (ApMode mode : modes) PrintTable(out, result, cls, thresholds, mode);
  }
  if (!cfg.pr_out.empty()) {
    std::string csv = "class,task,difficulty,iou,threshold,recall,precision,orientation_similarity\n";
    for (const EvalEntry& e : result.entries) {
      for (std::size_t i = 0; i < e.curve.thresholds.size(); ++i) {
        fmt::format_to(std::back_inserter(csv), "{},{},{},{:.2f},{:.6f},{:.6f},{:.6f},{}\n",
                       e.class_name, TaskName(e.task), DifficultyName(e.difficulty),
                       e.iou_threshold, e.curve.thresholds[i], e.curve.recall[i],
                       e.curve.precision[i],
                       e.task == EvalTask::k2D
                           ? fmt::format("{:.6f}", e.curve.orientation_similarity[i])
                           : std::string());
      }
    }
    WriteTextFile(cfg.pr_out, csv);
  }
  return kExitOk;
}

int RunSplitGen(const RunConfig& cfg, std::ostream& out) {
  const FrameSceneMap mapping = ParseFrameSceneMap(ReadTextFile(cfg.mapping));
  const std::set<int> val_frames = ParseFrameList(ReadTextFile(cfg.val_frames));
  std::set<std::string> extra;
  if (!cfg.scenes.empty()) extra = ParseSceneList(ReadTextFile(cfg.scenes));
  const SplitSpec split = GenerateDepthSplit(mapping, val_frames, extra);
  if (split.train_empty_warning) {
    Log()->warn("validation frames touch every scene; depth training split is empty");
  }
  fs::create_directories(cfg.output);
  WriteTextFile((fs::path(cfg.output) / "depth_train_scenes.txt").string(),
                WriteSceneList(split.depth_train_scenes));
  WriteTextFile((fs::path(cfg.output) / "depth_val_scenes.txt").string(),
                WriteSceneList(split.depth_val_scenes));
  fmt::print(out, "depth train scenes: {}\ndepth val scenes: {}\n",
             split.depth_train_scenes.size(), split.depth_val_scenes.size());
  return kExitOk;
}

int RunValidate(const RunConfig& cfg, std::ostream& out) {
  std::vector<std::string> problems;
  int checks = 0;
  const bool split_args = !cfg.mapping.empty() || !cfg.val_frames.empty() ||
                          !cfg.train_scenes.empty() || !cfg.val_scenes.empty();
  if (split_args) {
    if (cfg.mapping.empty() || cfg.val_frames.empty() || cfg.train_scenes.empty() ||
        cfg.val_scenes.empty()) {
      throw CLI::ValidationError(
          "split check needs --mapping, --val-frames, --train-scenes and --val-scenes");
    }
    ++checks;
    const auto found = CheckSplit(ParseFrameSceneMap(ReadTextFile(cfg.mapping)),
                                  ParseFrameList(ReadTextFile(cfg.val_frames)),
                                  ParseSceneList(ReadTextFile(cfg.train_scenes)),
                                  ParseSceneList(ReadTextFile(cfg.val_scenes)));
    problems.insert(problems.end(), found.begin(), found.end());
    if (found.empty()) fmt::print(out, "split: no leakage\n");
  }
  auto check_objects = [&](const std::string& dir, bool expect_score) {
    ++checks;
    std::size_t rows = 0;
    for (const auto& frame : ListFrames(dir)) {
      const std::string path = FramePath(dir, frame, ".txt");
      try {
        const auto records = ParseObjects(ReadTextFile(path), expect_score);
        for (const auto& r : records) ValidateRecord(r);
        rows += records.size();
      } catch (const Error& e) {
        problems.push_back(fmt::format("{}: {}", path, e.what()));
      }
    }
    fmt::print(out, "{}: {} row(s) checked\n", dir, rows);
  };
  if (!cfg.labels_dir.empty()) check_objects(cfg.labels_dir, false);
  if (!cfg.detections_dir.empty()) check_objects(cfg.detections_dir, true);
  if (!cfg.calib_dir.empty()) {
    ++checks;
    for (const auto& frame : ListFrames(cfg.calib_dir)) {
      const std::string path = FramePath(cfg.calib_dir, frame, ".txt");
      try {
        ParseCalibration(ReadTextFile(path));
      } catch (const Error& e) {
        problems.push_back(fmt::format("{}: {}", path, e.what()));
      }
    }
  }
  if (checks == 0) {
    throw CLI::ValidationError("validate needs at least one of the split, label, "
                               "detection or calibration inputs");
  }
  for (const auto& p : problems) Log()->error("{}", p);
  if (!problems.empty()) return kExitError;
  fmt::print(out, "ok\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Argument handling

struct Commands {
  CLI::App* voxelize = nullptr;
  CLI::App* heatmap = nullptr;
  CLI::App* rescore = nullptr;
  CLI::App* evaluate = nullptr;
  CLI::App* split_gen = nullptr;
  CLI::App* validate = nullptr;
};

void AddGridOptions(CLI::App* sub, RunConfig& cfg, std::string& shape, std::string& mode) {
  sub->add_option("--shape", shape, "Grid shape NX,NY,NZ")->capture_default_str();
  sub->add_option("--mode", mode, "Grid mode")
      ->check(CLI::IsMember({"point-aware", "object-aware"}))
      ->capture_default_str();
  sub->add_option("--margin", cfg.outlier_margin, "Outlier depth margin (m)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_flag("--rotate,!--no-rotate", cfg.frustum_rotate,
                "Rotate each RoI cloud into its frustum frame (default on)");
  sub->add_option("--calib-dir", cfg.calib_dir, "KITTI calib/ directory")->required();
  sub->add_option("--depth-dir", cfg.depth_dir, "16-bit depth PNG directory")->required();
  sub->add_option("--labels-dir", cfg.labels_dir, "Label or detection directory")->required();
  sub->add_option("--out", cfg.output, "Output directory")->required();
  sub->add_option("--frame", cfg.frame, "Process only this frame id");
  sub->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

Commands BuildApp(CLI::App& app, RunConfig& cfg, std::string& shape, std::string& mode,
                  std::string& config_path) {
  app.require_subcommand(1);
  app.add_option("--config", config_path, "key=value file; flags override it");
  // Lets --config appear after the subcommand too.
  app.fallthrough();
  Commands c;

  c.voxelize = app.add_subcommand("voxelize", "Build adaptive voxel grids per object");
  AddGridOptions(c.voxelize, cfg, shape, mode);
  c.voxelize->add_option("--image-dir", cfg.image_dir, "RGB PNG directory")->required();

  c.heatmap = app.add_subcommand("heatmap-dump", "Write 3D center heatmap targets");
  AddGridOptions(c.heatmap, cfg, shape, mode);
  c.heatmap->add_option("--radius", cfg.heatmap_radius, "Gaussian radius in cells")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  c.rescore = app.add_subcommand("rescore", "Multiply detection scores by lifting confidence");
  c.rescore->add_option("detections", cfg.detections_dir, "Detection directory")->required();
  c.rescore->add_option("calib", cfg.calib_dir, "Calibration directory")->required();
  c.rescore->add_option("out", cfg.output, "Output directory")->required();
  c.rescore->add_option("--lambda", cfg.lambda, "Depth scale (m)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c.rescore->add_flag("--clip,!--no-clip", cfg.clip,
                      "Clip projected boxes to the image (default on)");
  c.rescore->add_option("--image-size", cfg.image_size, "Image size WxH")->capture_default_str();
  c.rescore->add_option("--image-dir", cfg.image_dir, "Read per-frame image sizes from PNGs");
  c.rescore->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);

  c.evaluate = app.add_subcommand("evaluate", "KITTI-style AP / AOS evaluation");
  c.evaluate->add_option("gt", cfg.labels_dir, "Ground-truth label directory")->required();
  c.evaluate->add_option("det", cfg.detections_dir, "Detection directory")->required();
  c.evaluate->add_option("--class", cfg.classes, "Classes to evaluate")->delimiter(',');
  c.evaluate->add_option("--metrics", cfg.metrics, "r11,r40")->delimiter(',');
  c.evaluate->add_option("--iou", cfg.iou_thresholds, "IoU thresholds (default per class)")
      ->delimiter(',');
  c.evaluate->add_option("--pr-out", cfg.pr_out, "Write PR curves as CSV");
  c.evaluate->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);

  c.split_gen = app.add_subcommand("split-gen", "Leakage-free depth training split");
  c.split_gen->add_option("--mapping", cfg.mapping, "frame scene mapping")->required();
  c.split_gen->add_option("--val-frames", cfg.val_frames, "Detection validation frames")
      ->required();
  c.split_gen->add_option("--scenes", cfg.scenes, "Extra scene ids to consider");
  c.split_gen->add_option("--out", cfg.output, "Output directory")->required();

  c.validate = app.add_subcommand("validate", "Check inputs and split leakage");
  c.validate->add_option("--mapping", cfg.mapping, "frame scene mapping");
  c.validate->add_option("--val-frames", cfg.val_frames, "Detection validation frames");
  c.validate->add_option("--train-scenes", cfg.train_scenes, "Depth training scenes");
  c.validate->add_option("--val-scenes", cfg.val_scenes, "Depth validation scenes");
  c.validate->add_option("--labels-dir", cfg.labels_dir, "Label directory");
  c.validate->add_option("--detections-dir", cfg.detections_dir, "Detection directory");
  c.validate->add_option("--calib-dir", cfg.calib_dir, "Calibration directory");
  return c;
}

std::optional<std::string> FindConfigPath(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

bool HasFlag(const std::vector<std::string>& args, const std::string& key) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == "--" + key || a.rfind("--" + key + "=", 0) == 0 || a == "--no-" + key;
  });
}

std::string Trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// Splices key=value pairs from the config file into the argument list right
// after the subcommand, skipping keys already given on the command line and
// keys the selected subcommand does not understand.
std::vector<std::string> ApplyConfigFile(const std::vector<std::string>& args,
                                         CLI::App& app) {
  const auto path = FindConfigPath(args);
  if (!path) return args;
  if (!fs::is_regular_file(*path)) {
    throw ConsistencyError(fmt::format("config file {} does not exist", *path));
  }
  std::size_t sub_pos = 0;
  CLI::App* sub = nullptr;
  for (std::size_t i = 1; i < args.size() && sub == nullptr; ++i) {
    for (CLI::App* candidate : app.get_subcommands({})) {
      if (candidate->get_name() == args[i]) {
        sub = candidate;
        sub_pos = i;
        break;
      }
    }
  }
  if (sub == nullptr) return args;

  std::vector<std::string> injected;
  std::istringstream in(ReadTextFile(*path));
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = Trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(fmt::format("{}:{}: expected key=value", *path, number), number);
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (sub->get_option_no_throw("--" + key) == nullptr || HasFlag(args, key)) continue;
    if (kBooleanKeys.contains(key)) {
      if (value == "true" || value == "1" || value == "on") {
        injected.push_back("--" + key);
      } else if (value == "false" || value == "0" || value == "off") {
        injected.push_back("--no-" + key);
      } else {
        throw ParseError(fmt::format("{}:{}: {} must be true or false", *path, number, key),
                         number);
      }
      continue;
    }
    injected.push_back("--" + key);
    injected.push_back(value);
  }
  std::vector<std::string> merged(args.begin(), args.begin() + static_cast<long>(sub_pos) + 1);
  merged.insert(merged.end(), injected.begin(), injected.end());
  merged.insert(merged.end(), args.begin() + static_cast<long>(sub_pos) + 1, args.end());
  return merged;
}

void CheckPathsExist(const RunConfig& cfg) {
  const std::vector<std::pair<std::string, std::string>> inputs = {
      {"calibration", cfg.calib_dir},  {"labels", cfg.labels_dir},
      {"detections", cfg.detections_dir}, {"depth", cfg.depth_dir},
      {"image", cfg.image_dir},        {"mapping", cfg.mapping},
      {"validation frames", cfg.val_frames}, {"scene list", cfg.scenes},
      {"train scenes", cfg.train_scenes}, {"val scenes", cfg.val_scenes},
  };
  for (const auto& [what, path] : inputs) {
    if (path.empty()) continue;
    std::error_code ec;
    if (!fs::exists(path, ec)) {
      throw ConsistencyError(fmt::format("{} path {} does not exist", what, path));
    }
  }
}

}  // namespace

int Run(const std::vector<std::string>& raw_args, std::ostream& out) {
  RunConfig cfg;
  std::string shape = "32,16,64";
  std::string mode = "point-aware";
  std::string config_path;
  CLI::App app{"Monocular 3D detection toolkit", "ocm3d"};
  const Commands cmds = BuildApp(app, cfg, shape, mode, config_path);

  try {
    const std::vector<std::string> args = ApplyConfigFile(raw_args, app);
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
      cfg.shape = ParseShape(shape);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, std::cerr);
      return code == 0 ? kExitOk : kExitUsage;
    }
    cfg.mode = mode == "object-aware" ? GridMode::kObjectAware : GridMode::kPointAware;
    CheckPathsExist(cfg);

    if (cmds.voxelize->parsed()) return RunVoxelize(cfg, out, false);
    if (cmds.heatmap->parsed()) return RunVoxelize(cfg, out, true);
    if (cmds.rescore->parsed()) return RunRescore(cfg, out);
    if (cmds.evaluate->parsed()) return RunEvaluate(cfg, out);
    if (cmds.split_gen->parsed()) return RunSplitGen(cfg, out);
    if (cmds.validate->parsed()) return RunValidate(cfg, out);
  } catch (const CLI::ValidationError& e) {
    Log()->error("{}", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    Log()->error("{}", e.what());
    return kExitError;
  } catch (const fs::filesystem_error& e) {
    Log()->error("{}", e.what());
    return kExitError;
  }
  std::cerr << app.help();
  return kExitUsage;
}

int Run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return Run(args, std::cout);
}

}  // namespace ocm3d::cli
