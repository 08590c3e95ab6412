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

// Proposal to ground-truth assignment and positive/negative minibatch
// sampling for the proposal-network and refinement heads.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "osrcnn/geometry.hpp"

namespace osrcnn {

struct SamplingRegime {
  std::size_t n_s = 256;  // samples per image
  double t_pos = 0.7;     // IoU strictly above -> positive
  double t_neg = 0.3;     // IoU strictly below -> negative
  double p_pos = 0.5;     // positive fraction

  /// Centerness regression: (256, 0.3, 0.1, 1.0).
  static SamplingRegime centerness() { return {256, 0.3, 0.1, 1.0}; }
  /// ltrb box regression: (256, 0.7, 0.3, 0.5).
  static SamplingRegime ltrb() { return {256, 0.7, 0.3, 0.5}; }
  /// IoU and delta-xywh refinement heads: (512, 0.5, 0.5, 0.25).
  static SamplingRegime refinement() { return {512, 0.5, 0.5, 0.25}; }

  void validate() const;
};

enum class MatchStatus { kPositive, kNegative, kIgnored };

struct MatchResult {
  std::vector<std::optional<std::size_t>> matched_gt;  // argmax-IoU GT, none if no GT
  std::vector<MatchStatus> status;
  std::vector<double> max_iou;

  std::size_t size() const noexcept { return status.size(); }
};

/// Assigns every proposal to its highest-IoU ground truth (lowest index on
/// ties) and labels it by the regime thresholds. With no ground truth every
/// proposal is negative.
MatchResult match_proposals(std::span<const Box> proposals, std::span<const Box> gts,
                            const SamplingRegime& regime);

/// Draws at most ceil(p_pos * n_s) positives and fills the rest of the n_s
/// budget with negatives, each uniformly without replacement. Positives come
/// first in the returned list.
std::vector<std::size_t> sample_minibatch(const MatchResult& match, const SamplingRegime& regime,
                                          std::uint64_t rng_seed);

}  // namespace osrcnn
