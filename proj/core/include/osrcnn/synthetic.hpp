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

// Deterministic synthetic stand-in for backbone features: one isotropic
// Gaussian cluster per class around pairwise-separated unit-norm means, with
// proposals jittered around ground-truth boxes and scored from their actual
// localization quality. Unknown clusters only appear in the test images.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "osrcnn/dataset.hpp"
#include "osrcnn/pipeline.hpp"

namespace osrcnn {

struct ImageGroundTruth {
  Box box;
  int category_id = 0;  // label index or kUnknownClass
};

/// One line of a proposal-feature file.
struct ImageProposals {
  std::int64_t image_id = 0;
  std::vector<ProposalRecord> proposals;
  std::vector<ImageGroundTruth> gt;
};

struct SyntheticConfig {
  int feature_dim = 64;
  int known_classes = 8;
  int unknown_classes = 2;
  int samples_per_class = 240;  // training proposals per known class
  double spread = 0.04;         // per-dimension standard deviation
  double box_noise = 0.04;      // jitter as a fraction of box size
  int closeset_images = 60;
  int openset_images = 60;
  int objects_per_image = 3;
  int proposals_per_object = 4;
  int background_proposals = 6;
  double max_mean_cosine = 0.3;  // separation requirement between cluster means
  int image_width = 640;
  int image_height = 480;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticDataset {
  std::vector<Eigen::VectorXd> cluster_means;  // known classes first, then unknown
  std::vector<ImageProposals> train;
  std::vector<ImageProposals> test;
  DatasetIndex test_annotations;  // labels 0..K-1 and -1
  std::vector<std::int64_t> closeset_images;
};

/// Throws std::invalid_argument when the cluster means cannot be placed
/// under the separation requirement.
SyntheticDataset generate_synthetic(const SyntheticConfig& cfg);

}  // namespace osrcnn
