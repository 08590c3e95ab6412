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
#include "osrcnn/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "osrcnn/rng.hpp"

namespace osrcnn {

void SamplingRegime::validate() const {
  if (n_s == 0) throw std::invalid_argument("sampling regime: n_s must be positive");
  if (!(t_neg <= t_pos)) throw std::invalid_argument("sampling regime: t_neg must not exceed t_pos");
  if (!(p_pos >= 0.0 && p_pos <= 1.0)) {
    throw std::invalid_argument("sampling regime: p_pos must lie in [0, 1]");
  }
}

MatchResult match_proposals(std::span<const Box> proposals, std::span<const Box> gts,
                            const SamplingRegime& regime) {
  regime.validate();
  MatchResult out;
  out.matched_gt.resize(proposals.size());
  out.status.resize(proposals.size(), MatchStatus::kNegative);
  out.max_iou.resize(proposals.size(), 0.0);

  for (std::size_t p = 0; p < proposals.size(); ++p) {
    double best = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double v = iou(proposals[p], gts[g]);
      if (v > best) {
        best = v;
        out.matched_gt[p] = g;
      }
    }
    if (gts.empty()) continue;
    out.max_iou[p] = best;
    if (best > regime.t_pos) {
      out.status[p] = MatchStatus::kPositive;
    } else if (best < regime.t_neg) {
      out.status[p] = MatchStatus::kNegative;
    } else {
      out.status[p] = MatchStatus::kIgnored;
    }
  }
  return out;
}

std::vector<std::size_t> sample_minibatch(const MatchResult& match, const SamplingRegime& regime,
                                          std::uint64_t rng_seed) {
  regime.validate();
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match.status[i] == MatchStatus::kPositive) positives.push_back(i);
    if (match.status[i] == MatchStatus::kNegative) negatives.push_back(i);
  }

  const auto pos_quota = static_cast<std::size_t>(
      std::ceil(regime.p_pos * static_cast<double>(regime.n_s) - 1e-12));
  Rng rng(rng_seed);
  auto picked = rng.sample_without_replacement(positives, std::min(pos_quota, regime.n_s));
  const auto neg_picked = rng.sample_without_replacement(negatives, regime.n_s - picked.size());
  picked.insert(picked.end(), neg_picked.begin(), neg_picked.end());
  return picked;
}

}  // namespace osrcnn
