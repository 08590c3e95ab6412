/* Copyright 2026 The osrcnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

// Open-set detection evaluation: greedy matching, all-point interpolated AP
// (single IoU 0.5, or averaged over IoU 0.50:0.05:0.95), wilderness impact at
// a fixed close-set recall, absolute open-set error, and unknown recall/AP.
//
// Labels are known class indices 0..K-1 or kUnknownClass (-1). Difficult
// ground truth never counts as a miss, and detections matched to it are
// neither true nor false positives.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "osrcnn/geometry.hpp"
#include "osrcnn/labels.hpp"

namespace osrcnn {

struct GroundTruth {
  std::int64_t image_id = 0;
  Box box;
  int label = 0;
  bool difficult = false;
};

struct EvalDetection {
  std::int64_t image_id = 0;
  Box box;
  int label = 0;
  double score = 0.0;
};

enum class MatchOutcome { kTruePositive, kFalsePositive, kIgnored };

struct DetectionMatch {
  MatchOutcome outcome = MatchOutcome::kFalsePositive;
  int gt_index = -1;  // index into the ground-truth span, -1 when unmatched
};

/// Greedy matching for one image and one class. Detections are visited by
/// descending score (ties by input order); each takes the highest-IoU
/// unmatched non-difficult ground truth with IoU >= iou_thresh. Failing that,
/// overlapping a difficult box makes it ignored; otherwise it is a false
/// positive. The result is aligned with the input order of `dets`.
std::vector<DetectionMatch> match_detections(std::span<const EvalDetection> dets,
                                             std::span<const GroundTruth> gts, double iou_thresh);

/// match_detections applied per image to the detections and ground truth
/// carrying `label`. Entries for detections of other labels are kIgnored.
std::vector<DetectionMatch> match_class(std::span<const EvalDetection> dets,
                                        std::span<const GroundTruth> gts, int label,
                                        double iou_thresh);

struct PRCurve {
  std::vector<double> scores;  // descending
  std::vector<std::size_t> cum_tp;
  std::vector<std::size_t> cum_fp;
  std::vector<double> precision;
  std::vector<double> recall;
  std::size_t num_gt = 0;
};

/// Builds the curve from per-detection outcomes; ignored entries are skipped.
PRCurve pr_curve(std::span<const double> scores, std::span<const MatchOutcome> outcomes,
                 std::size_t num_gt);

/// Area under the monotone precision envelope (every recall change counts).
double all_point_ap(const PRCurve& curve);

enum class ApMethod { kVoc2012, kCoco };

/// The ten COCO IoU thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_iou_thresholds();

/// AP of `label` over all images. nullopt when the class has no
/// non-difficult ground truth.
std::optional<double> average_precision(std::span<const EvalDetection> dets,
                                        std::span<const GroundTruth> gts, int label,
                                        ApMethod method);

/// Pooled known-class outcomes, the input to wilderness impact.
struct MatchedResults {
  std::vector<double> scores;
  std::vector<MatchOutcome> outcomes;
  std::size_t num_gt = 0;
};

/// Matches every known class at `iou_thresh` and pools the outcomes.
/// Unknown-labelled detections and ground truth are left out.
MatchedResults pool_known_matches(std::span<const EvalDetection> dets,
                                  std::span<const GroundTruth> gts, int num_classes,
                                  double iou_thresh = 0.5);

struct WildernessImpact {
  double value = 0.0;  // (P_K / P_KU - 1) * 100
  double threshold = 0.0;
  double closeset_recall = 0.0;
  double closeset_precision = 0.0;
  double openset_precision = 0.0;
};

/// Picks the highest score threshold at which close-set recall reaches
/// `recall_level` and compares close- and open-set precision there. Throws
/// UnreachableRecallError carrying the best achievable recall otherwise.
WildernessImpact wilderness_impact(const MatchedResults& closeset, const MatchedResults& openset,
                                   double recall_level);

/// Unknown ground truth covered (IoU >= iou_thresh) by a known-class
/// detection that did not match a known ground truth; each counted once.
/// Detections scoring below `min_score` are dropped first.
std::size_t absolute_open_set_error(std::span<const EvalDetection> dets,
                                    std::span<const GroundTruth> gts, int num_classes,
                                    double iou_thresh = 0.5,
                                    double min_score = -std::numeric_limits<double>::infinity());

/// Fraction of non-difficult unknown ground truth matched by an unknown
/// detection at iou_thresh. nullopt without unknown ground truth.
std::optional<double> unknown_recall(std::span<const EvalDetection> dets,
                                     std::span<const GroundTruth> gts, double iou_thresh = 0.5);

std::optional<double> unknown_ap(std::span<const EvalDetection> dets,
                                 std::span<const GroundTruth> gts, ApMethod method);

struct PRSample {
  double recall = 0.0;
  double precision = 0.0;  // interpolated (envelope) precision
};

struct EvalOptions {
  int num_classes = 1;
  std::vector<std::string> class_names;  // optional, size num_classes
  ApMethod method = ApMethod::kVoc2012;
  double recall_level = 0.8;
  double iou_thresh = 0.5;
  /// Images forming the close-set condition. When empty, every image
  /// without unknown ground truth is close-set.
  std::set<std::int64_t> closeset_images;
  std::size_t pr_samples = 101;
};

struct ClassReport {
  int label = 0;
  std::string name;
  std::size_t num_gt = 0;
  std::size_t num_detections = 0;
  std::optional<double> ap;
  std::vector<PRSample> pr;
};

struct EvalReport {
  std::vector<ClassReport> classes;  // known classes in index order
  ClassReport unknown;               // pooled unknown pseudo-class
  double map_known = 0.0;            // mean over classes with ground truth
  std::optional<WildernessImpact> wi;
  std::string wi_error;              // set when wi is absent
  double max_closeset_recall = 0.0;
  std::size_t aose = 0;
  std::optional<double> unknown_recall;
  std::optional<double> unknown_ap;
  std::size_t num_images = 0;
  std::size_t num_closeset_images = 0;
  std::size_t num_unknown_gt = 0;
  std::size_t num_detections = 0;
};

/// Full metric suite. Throws SchemaError when a label lies outside the label
/// map (known 0..num_classes-1 or kUnknownClass).
EvalReport evaluate(std::span<const EvalDetection> dets, std::span<const GroundTruth> gts,
                    const EvalOptions& opts);

}  // namespace osrcnn
