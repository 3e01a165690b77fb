#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ocm3d/types.hpp"

namespace ocm3d {

enum class Difficulty : int { kEasy = 0, kModerate = 1, kHard = 2 };
inline constexpr std::array<Difficulty, 3> kAllDifficulties = {
    Difficulty::kEasy, Difficulty::kModerate, Difficulty::kHard};
const char* DifficultyName(Difficulty difficulty);

struct DifficultyThresholds {
  double min_box_height = 0.0;  // px, object must be strictly taller
  int max_occlusion = 0;
  double max_truncation = 0.0;
};

struct DifficultyRules {
  std::array<DifficultyThresholds, 3> levels{{
      {40.0, 0, 0.15},
      {25.0, 1, 0.30},
      {25.0, 2, 0.50},
  }};

  const DifficultyThresholds& operator[](Difficulty d) const {
    return levels[static_cast<int>(d)];
  }
};

bool SatisfiesLevel(const ObjectRecord& gt, const DifficultyThresholds& level);
// Easiest satisfied level, or nullopt when the object is ignored everywhere.
std::optional<Difficulty> AssignDifficulty(const ObjectRecord& gt,
                                           const DifficultyRules& rules = {});

enum class EvalTask : int { k2D = 0, kBev = 1, k3D = 2 };
inline constexpr std::array<EvalTask, 3> kAllTasks = {EvalTask::k2D, EvalTask::kBev,
                                                      EvalTask::k3D};
const char* TaskName(EvalTask task);

// IoU between two records under the task's box representation.
double TaskOverlap(EvalTask task, const ObjectRecord& a, const ObjectRecord& b);

enum class ApMode { kR11, kR40 };
const char* ApModeName(ApMode mode);

// ---------------------------------------------------------------------------
// Matching

enum class GtRole : std::uint8_t {
  kPositive,  // counts toward recall
  kIgnored,   // may absorb a detection, never a TP or FN
  kDontCare,  // region; swallows unmatched detections
  kUnrelated,
};

enum class DetOutcome : std::uint8_t { kTruePositive, kFalsePositive, kIgnored };

// Greedy one-to-one assignment. Detections are visited in the given order
// (callers sort by descending score). Each takes the unmatched candidate
// (kPositive or kIgnored) with the largest overlap >= threshold; ties go to
// the lower ground-truth index. `overlaps[d][g]`.
std::vector<int> GreedyAssign(const std::vector<std::vector<double>>& overlaps,
                              std::span<const GtRole> roles, double threshold);

struct MatchOptions {
  std::string class_name = "Car";
  Difficulty difficulty = Difficulty::kModerate;
  EvalTask task = EvalTask::k3D;
  double iou_threshold = 0.7;
  DifficultyRules rules;
};

struct FrameMatch {
  // Indices into the input detection list of the evaluated detections,
  // sorted by descending score (stable).
  std::vector<int> order;
  std::vector<DetOutcome> outcomes;    // parallel to `order`
  std::vector<int> matched_gt;         // parallel to `order`; -1 if none
  std::vector<double> similarity;      // (1 + cos(d_ry)) / 2 for TPs, else 0
  int num_positives = 0;
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
};

// Neighbouring classes (Van for Car, Person_sitting for Pedestrian) are
// ignored rather than missed.
GtRole ClassifyGroundTruth(const ObjectRecord& gt, const MatchOptions& options);

FrameMatch MatchDetections(std::span<const ObjectRecord> detections,
                           std::span<const ObjectRecord> ground_truth,
                           const MatchOptions& options);

// ---------------------------------------------------------------------------
// Curves and averages

struct ScoredOutcome {
  double score = 0.0;
  bool true_positive = false;
  double similarity = 0.0;
};

// One point per distinct score threshold, highest first.
struct PrCurve {
  int num_positives = 0;
  std::vector<double> thresholds;
  std::vector<int> true_positives;
  std::vector<int> false_positives;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> orientation_similarity;
};

PrCurve BuildPrCurve(std::vector<ScoredOutcome> outcomes, int num_positives);

// Mean of max-to-the-right interpolated precision at the sampled recalls:
// R11 = {0, 0.1, ..., 1}, R40 = {1/40, ..., 1}.
double AveragePrecision(const PrCurve& curve, ApMode mode);
// Same sampling with orientation similarity in place of precision.
double AverageOrientationSimilarity(const PrCurve& curve, ApMode mode);

// ---------------------------------------------------------------------------
// Full evaluation

using FrameObjects = std::map<std::string, std::vector<ObjectRecord>>;

struct EvalConfig {
  std::vector<std::string> classes{"Car"};
  // Per class; classes without an entry use DefaultIouThresholds().
  std::map<std::string, std::vector<double>> iou_thresholds;
  DifficultyRules rules;
  // Worker threads over (class, difficulty, task, threshold) cells. The
  // result does not depend on this value.
  int jobs = 1;
};

std::vector<double> DefaultIouThresholds(const std::string& class_name);

struct EvalEntry {
  std::string class_name;
  Difficulty difficulty = Difficulty::kEasy;
  EvalTask task = EvalTask::k2D;
  double iou_threshold = 0.0;
  PrCurve curve;
  double ap_r11 = 0.0;
  double ap_r40 = 0.0;
  // Only for the 2D task.
  std::optional<double> aos_r11;
  std::optional<double> aos_r40;

  double ap(ApMode mode) const { return mode == ApMode::kR11 ? ap_r11 : ap_r40; }
};

struct EvalResult {
  std::vector<EvalEntry> entries;

  const EvalEntry* Find(const std::string& class_name, Difficulty difficulty,
                        EvalTask task, double iou_threshold) const;
};

// Frames present in `ground_truth` but absent from `detections` count as
// frames with no detections. The reverse throws ConsistencyError.
EvalResult Evaluate(const FrameObjects& detections, const FrameObjects& ground_truth,
                    const EvalConfig& config = {});

}  // namespace ocm3d
