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

// Inference from scored proposals to open-set detections.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "osrcnn/geometry.hpp"
#include "osrcnn/labels.hpp"
#include "osrcnn/prototype.hpp"

namespace osrcnn {

struct ProposalRecord {
  Box initial_box;         // decoded from ltrb regression
  double centerness = 0.0;  // c
  Box refined_box;         // after delta-xywh refinement
  double iou_score = 0.0;  // b, predicted IoU
  Eigen::VectorXd feature;
};

struct Detection {
  Box box;
  int label = kUnknownClass;      // known class index or kUnknownClass
  double score = 0.0;             // objectness s
  double class_probability = 0.0;  // softmax probability of `label`; 0 for unknown
  double min_distance = 0.0;      // smallest prototype distance
};

struct PipelineConfig {
  std::size_t pre_nms_topk = 1000;
  double nms_thresh = 0.7;
  double objectness_floor = 0.05;
  double unknown_threshold = 0.17;
  std::size_t per_group_topk = 50;
  double group_nms_thresh = 0.5;

  void validate() const;
};

/// Geometric mean sqrt(c * b); both inputs must lie in [0, 1].
double objectness(double centerness, double iou_score);

/// Runs, in order: top-k by centerness, NMS on the initial boxes, switch to
/// the refined boxes, objectness floor, open-set identification, softmax
/// labelling of known proposals, NMS per known class and over all unknowns,
/// and the final per-group top-k by objectness. Known detections come first,
/// each group sorted by descending objectness.
///
/// Proposals whose embedding is the zero vector cannot be compared with the
/// prototypes and are treated as unknown at distance 1.
std::vector<Detection> run_inference(std::span<const ProposalRecord> proposals,
                                     const PrototypeModel& model, const PipelineConfig& cfg);

}  // namespace osrcnn
