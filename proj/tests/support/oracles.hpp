#pragma once

// Reference implementations used only by tests. They share no code with the
// library beyond the plain data types.

#include <array>
#include <string>
#include <vector>

#include "ocm3d/eval.hpp"
#include "ocm3d/types.hpp"

namespace ocm3d::oracle {

// Boundaries by direct definition, one selection per boundary.
std::vector<double> UniformBoundaries(std::vector<double> values, int n);
std::vector<double> QuantileBoundaries(std::vector<double> values, int n);

// Counts cell centers of a `cell`-sized lattice inside each footprint.
struct RasterOverlap {
  double area_a = 0.0;
  double area_b = 0.0;
  double intersection = 0.0;
  double iou() const;
};
RasterOverlap RasterBev(const Box3D& a, const Box3D& b, double cell);
double RasterIou3D(const Box3D& a, const Box3D& b, double cell);

// Projected hull from an explicit R_y matrix and a 3x4 product.
Box2D ProjectHull(const Box3D& box, const CameraCalib& calib, int width, int height,
                  bool clip);

// Exhaustive search over every one-to-one partial assignment, keeping the
// lexicographically best one when detections are read in order and each
// choice is ranked by (matched, overlap, -gt index).
std::vector<int> ExhaustiveMatching(const std::vector<std::vector<double>>& overlaps,
                                    const std::vector<bool>& candidate, double threshold);

struct BruteScores {
  double ap_r11 = 0.0;
  double ap_r40 = 0.0;
  double aos_r11 = 0.0;
  double aos_r40 = 0.0;
};

// Rebuilds the matching from scratch for every score threshold.
BruteScores BruteForceEvaluate(const FrameObjects& detections,
                               const FrameObjects& ground_truth,
                               const std::string& class_name, Difficulty difficulty,
                               EvalTask task, double iou_threshold,
                               const DifficultyRules& rules = {});

}  // namespace ocm3d::oracle
