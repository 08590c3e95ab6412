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
#include "osrcnn/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "osrcnn/errors.hpp"

namespace osrcnn {
namespace {

std::vector<std::size_t> by_descending_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::size_t count_gt(std::span<const GroundTruth> gts, int label) {
  return static_cast<std::size_t>(std::count_if(gts.begin(), gts.end(), [&](const GroundTruth& g) {
    return g.label == label && !g.difficult;
  }));
}

std::vector<PRSample> sample_envelope(const PRCurve& curve, std::size_t samples) {
  std::vector<PRSample> out;
  if (samples < 2) return out;
  for (std::size_t s = 0; s < samples; ++s) {
    const double r = static_cast<double>(s) / static_cast<double>(samples - 1);
    double best = 0.0;
    for (std::size_t i = 0; i < curve.recall.size(); ++i) {
      if (curve.recall[i] >= r - 1e-12) best = std::max(best, curve.precision[i]);
    }
    out.push_back({r, best});
  }
  return out;
}

PRCurve class_curve(std::span<const EvalDetection> dets, std::span<const GroundTruth> gts,
                    int label, double iou_thresh) {
  const auto matches = match_class(dets, gts, label, iou_thresh);
  std::vector<double> scores;
  std::vector<MatchOutcome> outcomes;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].label != label) continue;
    scores.push_back(dets[i].score);
    outcomes.push_back(matches[i].outcome);
  }
  return pr_curve(scores, outcomes, count_gt(gts, label));
}

double precision_at(const MatchedResults& r, double threshold) {
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < r.scores.size(); ++i) {
    if (r.scores[i] < threshold) continue;
    if (r.outcomes[i] == MatchOutcome::kTruePositive) ++tp;
    if (r.outcomes[i] == MatchOutcome::kFalsePositive) ++fp;
  }
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

}  // namespace

std::vector<DetectionMatch> match_detections(std::span<const EvalDetection> dets,
                                             std::span<const GroundTruth> gts,
                                             double iou_thresh) {
  std::vector<double> scores(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) scores[i] = dets[i].score;

  std::vector<DetectionMatch> out(dets.size());
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t d : by_descending_score(scores)) {
    int best = -1;
    double best_iou = -1.0;
    bool hits_difficult = false;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double v = iou(dets[d].box, gts[g].box);
      if (v < iou_thresh || v <= 0.0) continue;
      if (gts[g].difficult) {
        hits_difficult = true;
      } else if (!taken[g] && v > best_iou) {
        best_iou = v;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      taken[best] = true;
      out[d] = {MatchOutcome::kTruePositive, best};
    } else if (hits_difficult) {
      out[d] = {MatchOutcome::kIgnored, -1};
    } else {
      out[d] = {MatchOutcome::kFalsePositive, -1};
    }
  }
  return out;
}

std::vector<DetectionMatch> match_class(std::span<const EvalDetection> dets,
                                        std::span<const GroundTruth> gts, int label,
                                        double iou_thresh) {
  std::map<std::int64_t, std::vector<std::size_t>> det_by_image;
  std::map<std::int64_t, std::vector<std::size_t>> gt_by_image;
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (dets[i].label == label) det_by_image[dets[i].image_id].push_back(i);
  for (std::size_t i = 0; i < gts.size(); ++i)
    if (gts[i].label == label) gt_by_image[gts[i].image_id].push_back(i);

  std::vector<DetectionMatch> out(dets.size(), {MatchOutcome::kIgnored, -1});
  for (const auto& [image, det_idx] : det_by_image) {
    std::vector<EvalDetection> local_dets;
    for (std::size_t i : det_idx) local_dets.push_back(dets[i]);
    std::vector<GroundTruth> local_gts;
    std::vector<std::size_t> gt_idx;
    if (auto it = gt_by_image.find(image); it != gt_by_image.end()) {
      gt_idx = it->second;
      for (std::size_t i : gt_idx) local_gts.push_back(gts[i]);
    }
    const auto local = match_detections(local_dets, local_gts, iou_thresh);
    for (std::size_t k = 0; k < det_idx.size(); ++k) {
      out[det_idx[k]] = {local[k].outcome,
                         local[k].gt_index < 0 ? -1 : static_cast<int>(gt_idx[local[k].gt_index])};
    }
  }
  return out;
}

PRCurve pr_curve(std::span<const double> scores, std::span<const MatchOutcome> outcomes,
                 std::size_t num_gt) {
  if (scores.size() != outcomes.size()) {
    throw std::invalid_argument("pr_curve: scores and outcomes differ in length");
  }
  PRCurve c;
  c.num_gt = num_gt;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i : by_descending_score(scores)) {
    if (outcomes[i] == MatchOutcome::kIgnored) continue;
    (outcomes[i] == MatchOutcome::kTruePositive ? tp : fp) += 1;
    c.scores.push_back(scores[i]);
    c.cum_tp.push_back(tp);
    c.cum_fp.push_back(fp);
    c.precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    c.recall.push_back(num_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(num_gt));
  }
  return c;
}

double all_point_ap(const PRCurve& curve) {
  if (curve.num_gt == 0 || curve.recall.empty()) return 0.0;
  std::vector<double> rec{0.0};
  std::vector<double> prec{0.0};
  rec.insert(rec.end(), curve.recall.begin(), curve.recall.end());
  prec.insert(prec.end(), curve.precision.begin(), curve.precision.end());
  rec.push_back(1.0);
  prec.push_back(0.0);
  for (std::size_t i = prec.size() - 1; i > 0; --i) prec[i - 1] = std::max(prec[i - 1], prec[i]);
  double ap = 0.0;
  for (std::size_t i = 1; i < rec.size(); ++i) {
    if (rec[i] != rec[i - 1]) ap += (rec[i] - rec[i - 1]) * prec[i];
  }
  return ap;
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.5 + 0.05 * i);
  return t;
}

std::optional<double> average_precision(std::span<const EvalDetection> dets,
                                        std::span<const GroundTruth> gts, int label,
                                        ApMethod method) {
  if (count_gt(gts, label) == 0) return std::nullopt;
  const std::vector<double> thresholds =
      method == ApMethod::kVoc2012 ? std::vector<double>{0.5} : coco_iou_thresholds();
  double sum = 0.0;
  for (double t : thresholds) sum += all_point_ap(class_curve(dets, gts, label, t));
  return sum / static_cast<double>(thresholds.size());
}

MatchedResults pool_known_matches(std::span<const EvalDetection> dets,
                                  std::span<const GroundTruth> gts, int num_classes,
                                  double iou_thresh) {
  MatchedResults r;
  for (int c = 0; c < num_classes; ++c) {
    const auto matches = match_class(dets, gts, c, iou_thresh);
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (dets[i].label != c) continue;
      r.scores.push_back(dets[i].score);
      r.outcomes.push_back(matches[i].outcome);
    }
    r.num_gt += count_gt(gts, c);
  }
  return r;
}

WildernessImpact wilderness_impact(const MatchedResults& closeset, const MatchedResults& openset,
                                   double recall_level) {
  if (!(recall_level > 0.0 && recall_level <= 1.0)) {
    throw std::invalid_argument("wilderness_impact: recall level must lie in (0, 1]");
  }
  if (closeset.scores.size() != closeset.outcomes.size() ||
      openset.scores.size() != openset.outcomes.size()) {
    throw std::invalid_argument("wilderness_impact: scores and outcomes differ in length");
  }

  const auto order = by_descending_score(closeset.scores);
  std::size_t tp = 0;
  double max_recall = 0.0;
  std::optional<double> threshold;
  for (std::size_t k = 0; k < order.size();) {
    // Consume a whole block of tied scores before testing the recall.
    const double s = closeset.scores[order[k]];
    for (; k < order.size() && closeset.scores[order[k]] == s; ++k) {
      if (closeset.outcomes[order[k]] == MatchOutcome::kTruePositive) ++tp;
    }
    const double recall =
        closeset.num_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(closeset.num_gt);
    max_recall = std::max(max_recall, recall);
    if (recall >= recall_level) {
      threshold = s;
      break;
    }
  }
  if (!threshold) {
    throw UnreachableRecallError("close-set recall never reaches " + std::to_string(recall_level) +
                                     " (maximum " + std::to_string(max_recall) + ")",
                                 max_recall);
  }

  WildernessImpact wi;
  wi.threshold = *threshold;
  wi.closeset_recall = max_recall;
  wi.closeset_precision = precision_at(closeset, wi.threshold);
  wi.openset_precision = precision_at(openset, wi.threshold);
  if (wi.openset_precision == 0.0) {
    throw std::invalid_argument("wilderness_impact: open-set precision is zero at the operating point");
  }
  wi.value = (wi.closeset_precision / wi.openset_precision - 1.0) * 100.0;
  return wi;
}

std::size_t absolute_open_set_error(std::span<const EvalDetection> dets,
                                    std::span<const GroundTruth> gts, int num_classes,
                                    double iou_thresh, double min_score) {
  std::vector<EvalDetection> kept;
  for (const auto& d : dets)
    if (d.label != kUnknownClass && d.score >= min_score) kept.push_back(d);

  std::map<std::int64_t, std::vector<Box>> false_positives;
  for (int c = 0; c < num_classes; ++c) {
    const auto matches = match_class(kept, gts, c, iou_thresh);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (kept[i].label == c && matches[i].outcome == MatchOutcome::kFalsePositive) {
        false_positives[kept[i].image_id].push_back(kept[i].box);
      }
    }
  }

  std::size_t count = 0;
  for (const auto& g : gts) {
    if (g.label != kUnknownClass || g.difficult) continue;
    const auto it = false_positives.find(g.image_id);
    if (it == false_positives.end()) continue;
    const bool covered = std::any_of(it->second.begin(), it->second.end(), [&](const Box& b) {
      const double v = iou(b, g.box);
      return v >= iou_thresh && v > 0.0;
    });
    if (covered) ++count;
  }
  return count;
}

std::optional<double> unknown_recall(std::span<const EvalDetection> dets,
                                     std::span<const GroundTruth> gts, double iou_thresh) {
  const std::size_t total = count_gt(gts, kUnknownClass);
  if (total == 0) return std::nullopt;
  const auto matches = match_class(dets, gts, kUnknownClass, iou_thresh);
  const auto tp = std::count_if(matches.begin(), matches.end(), [](const DetectionMatch& m) {
    return m.outcome == MatchOutcome::kTruePositive;
  });
  return static_cast<double>(tp) / static_cast<double>(total);
}

std::optional<double> unknown_ap(std::span<const EvalDetection> dets,
                                 std::span<const GroundTruth> gts, ApMethod method) {
  return average_precision(dets, gts, kUnknownClass, method);
}

EvalReport evaluate(std::span<const EvalDetection> dets, std::span<const GroundTruth> gts,
                    const EvalOptions& opts) {
  if (opts.num_classes < 1) throw std::invalid_argument("evaluate: need at least one known class");
  if (!opts.class_names.empty() &&
      opts.class_names.size() != static_cast<std::size_t>(opts.num_classes)) {
    throw SchemaError("evaluate: class name table does not match the number of classes");
  }
  auto valid_label = [&](int l) { return l == kUnknownClass || (l >= 0 && l < opts.num_classes); };
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!valid_label(dets[i].label)) {
      throw SchemaError("label-map mismatch: detection " + std::to_string(i) + " has label " +
                        std::to_string(dets[i].label));
    }
  }
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (!valid_label(gts[i].label)) {
      throw SchemaError("label-map mismatch: ground truth " + std::to_string(i) + " has label " +
                        std::to_string(gts[i].label));
    }
  }

  EvalReport rep;
  std::set<std::int64_t> images;
  std::set<std::int64_t> open_images;
  for (const auto& g : gts) {
    images.insert(g.image_id);
    if (g.label == kUnknownClass) open_images.insert(g.image_id);
  }
  for (const auto& d : dets) images.insert(d.image_id);
  std::set<std::int64_t> closeset = opts.closeset_images;
  if (closeset.empty()) {
    for (auto id : images)
      if (!open_images.count(id)) closeset.insert(id);
  }
  rep.num_images = images.size();
  rep.num_closeset_images = closeset.size();
  rep.num_detections = dets.size();
  rep.num_unknown_gt = count_gt(gts, kUnknownClass);

  auto build_class = [&](int label, std::string name) {
    ClassReport cr;
    cr.label = label;
    cr.name = std::move(name);
    cr.num_gt = count_gt(gts, label);
    cr.num_detections = static_cast<std::size_t>(std::count_if(
        dets.begin(), dets.end(), [&](const EvalDetection& d) { return d.label == label; }));
    cr.ap = average_precision(dets, gts, label, opts.method);
    if (cr.num_gt > 0) {
      cr.pr = sample_envelope(class_curve(dets, gts, label, opts.iou_thresh), opts.pr_samples);
    }
    return cr;
  };

  double ap_sum = 0.0;
  std::size_t ap_count = 0;
  for (int c = 0; c < opts.num_classes; ++c) {
    std::string name = opts.class_names.empty() ? "class_" + std::to_string(c) : opts.class_names[c];
    rep.classes.push_back(build_class(c, std::move(name)));
    if (rep.classes.back().ap) {
      ap_sum += *rep.classes.back().ap;
      ++ap_count;
    }
  }
  rep.map_known = ap_count == 0 ? 0.0 : ap_sum / static_cast<double>(ap_count);
  rep.unknown = build_class(kUnknownClass, "unknown");

  std::vector<EvalDetection> close_dets;
  std::vector<GroundTruth> close_gts;
  for (const auto& d : dets)
    if (closeset.count(d.image_id) && d.label != kUnknownClass) close_dets.push_back(d);
  for (const auto& g : gts)
    if (closeset.count(g.image_id) && g.label != kUnknownClass) close_gts.push_back(g);
  const auto close_matches =
      pool_known_matches(close_dets, close_gts, opts.num_classes, opts.iou_thresh);
  const auto open_matches = pool_known_matches(dets, gts, opts.num_classes, opts.iou_thresh);
  try {
    rep.wi = wilderness_impact(close_matches, open_matches, opts.recall_level);
    rep.max_closeset_recall = rep.wi->closeset_recall;
  } catch (const UnreachableRecallError& e) {
    rep.wi_error = e.what();
    rep.max_closeset_recall = e.max_recall();
  } catch (const std::invalid_argument& e) {
    rep.wi_error = e.what();
  }

  rep.aose = absolute_open_set_error(dets, gts, opts.num_classes, opts.iou_thresh);
  rep.unknown_recall = unknown_recall(dets, gts, opts.iou_thresh);
  rep.unknown_ap = rep.unknown.ap;
  return rep;
}

}  // namespace osrcnn
