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
#include "osrcnn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

#include "osrcnn/errors.hpp"

namespace osrcnn {
namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

auto box_key(const Box& b) { return std::tie(b.x1, b.y1, b.x2, b.y2); }

// Strict total order used to make every stage independent of input order.
bool canonical_less(const ProposalRecord& a, const ProposalRecord& b) {
  if (a.centerness != b.centerness) return a.centerness > b.centerness;
  if (a.iou_score != b.iou_score) return a.iou_score > b.iou_score;
  if (box_key(a.initial_box) != box_key(b.initial_box)) {
    return box_key(a.initial_box) < box_key(b.initial_box);
  }
  if (box_key(a.refined_box) != box_key(b.refined_box)) {
    return box_key(a.refined_box) < box_key(b.refined_box);
  }
  return std::lexicographical_compare(a.feature.data(), a.feature.data() + a.feature.size(),
                                      b.feature.data(), b.feature.data() + b.feature.size());
}

// NMS over a group, keeping at most `topk` survivors. Input must already be
// in canonical order.
std::vector<Detection> suppress_group(std::vector<Detection> group, double thresh,
                                      std::size_t topk) {
  std::vector<Box> boxes;
  std::vector<double> scores;
  boxes.reserve(group.size());
  scores.reserve(group.size());
  for (const auto& d : group) {
    boxes.push_back(d.box);
    scores.push_back(d.score);
  }
  std::vector<Detection> out;
  for (std::size_t idx : nms(boxes, scores, thresh)) {
    if (out.size() == topk) break;
    out.push_back(group[idx]);
  }
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  if (pre_nms_topk == 0 || per_group_topk == 0) {
    throw std::invalid_argument("pipeline: top-k limits must be positive");
  }
  if (!in_unit(nms_thresh) || !in_unit(objectness_floor) || !in_unit(group_nms_thresh)) {
    throw std::invalid_argument("pipeline: thresholds must lie in [0, 1]");
  }
  if (!(unknown_threshold >= 0.0 && unknown_threshold <= 2.0)) {
    throw std::invalid_argument("pipeline: unknown threshold must lie in [0, 2]");
  }
}

double objectness(double centerness, double iou_score) {
  if (!in_unit(centerness) || !in_unit(iou_score)) {
    throw std::invalid_argument("objectness: scores must lie in [0, 1], got c=" +
                                std::to_string(centerness) + " b=" + std::to_string(iou_score));
  }
  return std::sqrt(centerness * iou_score);
}

std::vector<Detection> run_inference(std::span<const ProposalRecord> proposals,
                                     const PrototypeModel& model, const PipelineConfig& cfg) {
  cfg.validate();
  const auto d_f = model.encoder_weight.cols();
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto& p = proposals[i];
    if (p.feature.size() != d_f) {
      throw DimensionError("proposal " + std::to_string(i) + " has feature dimension " +
                           std::to_string(p.feature.size()) + ", model expects " +
                           std::to_string(d_f));
    }
    if (!p.initial_box.is_valid() || !p.refined_box.is_valid()) {
      throw std::invalid_argument("proposal " + std::to_string(i) + " has an invalid box");
    }
    if (!in_unit(p.centerness) || !in_unit(p.iou_score)) {
      throw std::invalid_argument("proposal " + std::to_string(i) + " has scores outside [0, 1]");
    }
  }

  // 1. top-k by centerness.
  std::vector<std::size_t> order(proposals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return canonical_less(proposals[a], proposals[b]);
  });
  if (order.size() > cfg.pre_nms_topk) order.resize(cfg.pre_nms_topk);

  // 2. NMS on the initial boxes scored by centerness.
  std::vector<Box> init_boxes;
  std::vector<double> ctr;
  for (std::size_t idx : order) {
    init_boxes.push_back(proposals[idx].initial_box);
    ctr.push_back(proposals[idx].centerness);
  }
  const auto kept = nms(init_boxes, ctr, cfg.nms_thresh);

  // 3-6. refined boxes, objectness floor, open-set identification, labels.
  PrototypeModel scoped = model;
  scoped.unknown_threshold = cfg.unknown_threshold;
  std::vector<Detection> candidates;
  for (std::size_t k : kept) {
    const auto& p = proposals[order[k]];
    Detection det;
    det.box = p.refined_box;
    det.score = objectness(p.centerness, p.iou_score);
    if (det.score < cfg.objectness_floor) continue;

    const Eigen::VectorXd z = encode(scoped, p.feature);
    if (z.squaredNorm() == 0.0) {
      det.label = kUnknownClass;
      det.min_distance = 1.0;
    } else {
      const OpenSetLabel label = classify_open_set(scoped, z);
      det.min_distance = label.min_distance;
      if (label.known) {
        det.label = label.predicted_class();
        det.class_probability = (*label.class_scores)(det.label);
      }
    }
    candidates.push_back(det);
  }

  // 7-8. per-group NMS and caps. `candidates` is in canonical order.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  const int num_classes = static_cast<int>(model.prototypes.rows());
  std::vector<Detection> known;
  for (int c = 0; c < num_classes; ++c) {
    std::vector<Detection> group;
    for (const auto& d : candidates)
      if (d.label == c) group.push_back(d);
    auto kept_group = suppress_group(std::move(group), cfg.group_nms_thresh, cfg.per_group_topk);
    known.insert(known.end(), kept_group.begin(), kept_group.end());
  }
  std::stable_sort(known.begin(), known.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  if (known.size() > cfg.per_group_topk) known.resize(cfg.per_group_topk);

  std::vector<Detection> unknown;
  for (const auto& d : candidates)
    if (d.label == kUnknownClass) unknown.push_back(d);
  unknown = suppress_group(std::move(unknown), cfg.group_nms_thresh, cfg.per_group_topk);

  known.insert(known.end(), unknown.begin(), unknown.end());
  return known;
}

}  // namespace osrcnn
