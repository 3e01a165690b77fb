#include "ocm3d/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <numeric>
#include <mutex>
#include <thread>

#include "ocm3d/errors.hpp"
#include "ocm3d/geometry.hpp"

namespace ocm3d {
namespace {

bool SameClass(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

bool IsNeighbourClass(std::string_view evaluated, std::string_view other) {
  return (SameClass(evaluated, "Car") && SameClass(other, "Van")) ||
         (SameClass(evaluated, "Pedestrian") && SameClass(other, "Person_sitting"));
}

// Label files used as detections carry no score; they rank as certain.
double ScoreOf(const ObjectRecord& det) { return det.score.value_or(1.0); }

bool IsCandidate(GtRole role) {
  return role == GtRole::kPositive || role == GtRole::kIgnored;
}

}  // namespace

const char* DifficultyName(Difficulty difficulty) {
  switch (difficulty) {
    case Difficulty::kEasy: return "easy";
    case Difficulty::kModerate: return "moderate";
    case Difficulty::kHard: return "hard";
  }
  return "?";
}

const char* TaskName(EvalTask task) {
  switch (task) {
    case EvalTask::k2D: return "2d";
    case EvalTask::kBev: return "bev";
    case EvalTask::k3D: return "3d";
  }
  return "?";
}

const char* ApModeName(ApMode mode) { return mode == ApMode::kR11 ? "R11" : "R40"; }

bool SatisfiesLevel(const ObjectRecord& gt, const DifficultyThresholds& level) {
  return gt.box2d.height() > level.min_box_height && gt.occlusion <= level.max_occlusion &&
         gt.truncation <= level.max_truncation;
}

std::optional<Difficulty> AssignDifficulty(const ObjectRecord& gt,
                                           const DifficultyRules& rules) {
  for (Difficulty d : kAllDifficulties) {
    if (SatisfiesLevel(gt, rules[d])) return d;
  }
  return std::nullopt;
}

double TaskOverlap(EvalTask task, const ObjectRecord& a, const ObjectRecord& b) {
  switch (task) {
    case EvalTask::k2D: return Iou2D(a.box2d, b.box2d);
    case EvalTask::kBev: return IouBev(a.box3d(), b.box3d());
    case EvalTask::k3D: return Iou3D(a.box3d(), b.box3d());
  }
  return 0.0;
}

std::vector<int> GreedyAssign(const std::vector<std::vector<double>>& overlaps,
                              std::span<const GtRole> roles, double threshold) {
  std::vector<int> assignment(overlaps.size(), -1);
  std::vector<bool> taken(roles.size(), false);
  for (std::size_t d = 0; d < overlaps.size(); ++d) {
    int best = -1;
    double best_overlap = 0.0;
    for (std::size_t g = 0; g < roles.size(); ++g) {
      if (taken[g] || !IsCandidate(roles[g])) continue;
      const double overlap = overlaps[d][g];
      if (overlap < threshold) continue;
      if (best < 0 || overlap > best_overlap) {
        best = static_cast<int>(g);
        best_overlap = overlap;
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      assignment[d] = best;
    }
  }
  return assignment;
}

GtRole ClassifyGroundTruth(const ObjectRecord& gt, const MatchOptions& options) {
  if (gt.is_dont_care()) return GtRole::kDontCare;
  if (SameClass(gt.class_name, options.class_name)) {
    return SatisfiesLevel(gt, options.rules[options.difficulty]) ? GtRole::kPositive
                                                                 : GtRole::kIgnored;
  }
  if (IsNeighbourClass(options.class_name, gt.class_name)) return GtRole::kIgnored;
  return GtRole::kUnrelated;
}

FrameMatch MatchDetections(std::span<const ObjectRecord> detections,
                           std::span<const ObjectRecord> ground_truth,
                           const MatchOptions& options) {
  FrameMatch m;
  const double min_height = options.rules[options.difficulty].min_box_height;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const ObjectRecord& det = detections[i];
    if (!SameClass(det.class_name, options.class_name)) continue;
    if (det.box2d.height() < min_height) continue;
    m.order.push_back(static_cast<int>(i));
  }
  std::stable_sort(m.order.begin(), m.order.end(), [&](int a, int b) {
    return ScoreOf(detections[static_cast<std::size_t>(a)]) >
           ScoreOf(detections[static_cast<std::size_t>(b)]);
  });

  std::vector<GtRole> roles(ground_truth.size());
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    roles[g] = ClassifyGroundTruth(ground_truth[g], options);
    if (roles[g] == GtRole::kPositive) ++m.num_positives;
  }

  std::vector<std::vector<double>> overlaps(m.order.size(),
                                            std::vector<double>(ground_truth.size(), 0.0));
  for (std::size_t d = 0; d < m.order.size(); ++d) {
    const ObjectRecord& det = detections[static_cast<std::size_t>(m.order[d])];
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (IsCandidate(roles[g])) overlaps[d][g] = TaskOverlap(options.task, det, ground_truth[g]);
    }
  }
  m.matched_gt = GreedyAssign(overlaps, roles, options.iou_threshold);

  m.outcomes.resize(m.order.size());
  m.similarity.assign(m.order.size(), 0.0);
  for (std::size_t d = 0; d < m.order.size(); ++d) {
    const ObjectRecord& det = detections[static_cast<std::size_t>(m.order[d])];
    const int g = m.matched_gt[d];
    if (g >= 0) {
      const ObjectRecord& gt = ground_truth[static_cast<std::size_t>(g)];
      if (roles[static_cast<std::size_t>(g)] == GtRole::kPositive) {
        m.outcomes[d] = DetOutcome::kTruePositive;
        m.similarity[d] = (1.0 + std::cos(det.rotation_y - gt.rotation_y)) / 2.0;
        ++m.true_positives;
      } else {
        m.outcomes[d] = DetOutcome::kIgnored;
      }
      continue;
    }
    const bool in_dont_care = std::any_of(
        ground_truth.begin(), ground_truth.end(), [&](const ObjectRecord& gt) {
          return gt.is_dont_care() &&
                 Overlap2DOverFirst(det.box2d, gt.box2d) >= options.iou_threshold;
        });
    if (in_dont_care) {
      m.outcomes[d] = DetOutcome::kIgnored;
    } else {
      m.outcomes[d] = DetOutcome::kFalsePositive;
      ++m.false_positives;
    }
  }
  m.false_negatives = m.num_positives - m.true_positives;
  return m;
}

PrCurve BuildPrCurve(std::vector<ScoredOutcome> outcomes, int num_positives) {
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const ScoredOutcome& a, const ScoredOutcome& b) {
                     return a.score > b.score;
                   });
  PrCurve curve;
  curve.num_positives = num_positives;
  int tp = 0;
  int fp = 0;
  double similarity = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const ScoredOutcome& o = outcomes[i];
    if (o.true_positive) {
      ++tp;
      similarity += o.similarity;
    } else {
      ++fp;
    }
    const bool group_end = i + 1 == outcomes.size() || outcomes[i + 1].score != o.score;
    if (!group_end) continue;
    curve.thresholds.push_back(o.score);
    curve.true_positives.push_back(tp);
    curve.false_positives.push_back(fp);
    curve.precision.push_back(static_cast<double>(tp) / (tp + fp));
    curve.recall.push_back(num_positives > 0 ? static_cast<double>(tp) / num_positives : 0.0);
    curve.orientation_similarity.push_back(similarity / (tp + fp));
  }
  return curve;
}

namespace {

// Mean of the right-to-left running maximum of `values`, sampled where the
// recall first reaches each sample point. Comparisons are exact: recall
// tp / P >= k / K  <=>  tp * K >= k * P.
double SampledAverage(const PrCurve& curve, const std::vector<double>& values,
                      ApMode mode) {
  if (curve.num_positives <= 0 || values.empty()) return 0.0;
  std::vector<double> suffix_max(values.size());
  double running = 0.0;
  for (std::size_t i = values.size(); i-- > 0;) {
    running = std::max(running, values[i]);
    suffix_max[i] = running;
  }
  const long long steps = mode == ApMode::kR11 ? 10 : 40;
  const long long first = mode == ApMode::kR11 ? 0 : 1;
  const long long positives = curve.num_positives;
  double sum = 0.0;
  for (long long k = first; k <= steps; ++k) {
    const auto it = std::partition_point(
        curve.true_positives.begin(), curve.true_positives.end(),
        [&](int tp) { return static_cast<long long>(tp) * steps < k * positives; });
    if (it == curve.true_positives.end()) break;
    sum += suffix_max[static_cast<std::size_t>(it - curve.true_positives.begin())];
  }
  return sum / static_cast<double>(steps - first + 1);
}

}  // namespace

double AveragePrecision(const PrCurve& curve, ApMode mode) {
  return SampledAverage(curve, curve.precision, mode);
}

double AverageOrientationSimilarity(const PrCurve& curve, ApMode mode) {
  return SampledAverage(curve, curve.orientation_similarity, mode);
}

std::vector<double> DefaultIouThresholds(const std::string& class_name) {
  if (SameClass(class_name, "Car")) return {0.5, 0.7};
  return {0.5};
}

const EvalEntry* EvalResult::Find(const std::string& class_name, Difficulty difficulty,
                                  EvalTask task, double iou_threshold) const {
  for (const EvalEntry& e : entries) {
    if (SameClass(e.class_name, class_name) && e.difficulty == difficulty &&
        e.task == task && std::abs(e.iou_threshold - iou_threshold) < 1e-9) {
      return &e;
    }
  }
  return nullptr;
}

EvalResult Evaluate(const FrameObjects& detections, const FrameObjects& ground_truth,
                    const EvalConfig& config) {
  for (const auto& [frame, dets] : detections) {
    if (!ground_truth.contains(frame)) {
      throw ConsistencyError(
          fmt::format("frame {} has detections but no ground truth", frame));
    }
  }

  EvalResult result;
  for (const std::string& cls : config.classes) {
    const auto it = config.iou_thresholds.find(cls);
    const std::vector<double> thresholds =
        it != config.iou_thresholds.end() ? it->second : DefaultIouThresholds(cls);
    for (double threshold : thresholds) {
      for (Difficulty difficulty : kAllDifficulties) {
        for (EvalTask task : kAllTasks) {
          EvalEntry e;
          e.class_name = cls;
          e.difficulty = difficulty;
          e.task = task;
          e.iou_threshold = threshold;
          result.entries.push_back(std::move(e));
        }
      }
    }
  }

  static const std::vector<ObjectRecord> kNoDetections;
  auto fill = [&](EvalEntry& e) {
    MatchOptions options;
    options.class_name = e.class_name;
    options.difficulty = e.difficulty;
    options.task = e.task;
    options.iou_threshold = e.iou_threshold;
    options.rules = config.rules;
    std::vector<ScoredOutcome> outcomes;
    int positives = 0;
    for (const auto& [frame, gts] : ground_truth) {
      const auto det_it = detections.find(frame);
      const auto& dets = det_it == detections.end() ? kNoDetections : det_it->second;
      const FrameMatch m = MatchDetections(dets, gts, options);
      positives += m.num_positives;
      for (std::size_t d = 0; d < m.order.size(); ++d) {
        if (m.outcomes[d] == DetOutcome::kIgnored) continue;
        outcomes.push_back({ScoreOf(dets[static_cast<std::size_t>(m.order[d])]),
                            m.outcomes[d] == DetOutcome::kTruePositive, m.similarity[d]});
      }
    }
    e.curve = BuildPrCurve(std::move(outcomes), positives);
    e.ap_r11 = AveragePrecision(e.curve, ApMode::kR11);
    e.ap_r40 = AveragePrecision(e.curve, ApMode::kR40);
    if (e.task == EvalTask::k2D) {
      e.aos_r11 = AverageOrientationSimilarity(e.curve, ApMode::kR11);
      e.aos_r40 = AverageOrientationSimilarity(e.curve, ApMode::kR40);
    }
  };

  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    for (EvalEntry& e : result.entries) fill(e);
    return result;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < result.entries.size(); i = next++) {
          try {
            fill(result.entries[i]);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

}  // namespace ocm3d
