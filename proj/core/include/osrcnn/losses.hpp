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

// Training objectives with hand-written gradients: smooth L1, softmax cross
// entropy, the double-margin prototype contrastive loss and the weighted
// compositions used for the proposal network and the full detector.

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace osrcnn {

/// A scalar objective and its gradient with respect to each differentiable
/// input, in the order the producing function documents.
struct LossValue {
  double value = 0.0;
  std::vector<std::vector<double>> gradients;
};

/// Coefficients of the proposal-network loss (lambda1..4) and of the
/// detector loss (alpha, beta, gamma).
struct LossWeights {
  double alpha = 1.0;
  double beta = 2.0;
  double gamma = 1.0;
  std::array<double, 4> lambda{1.0, 10.0, 1.0, 2.0};

  /// Settings used for the VOC/COCO open-set benchmark.
  static LossWeights voc_coco() { return {1.0, 0.5, 0.8, {0.5, 0.5, 0.5, 0.5}}; }
  /// Settings used for the GraspNet open-set benchmark (the default).
  static LossWeights graspnet() { return {}; }

  void validate() const;
};

/// Hinge thresholds on cosine distance: same-class pairs are pulled below
/// `positive`, other-class pairs pushed above `negative`.
struct Margins {
  double positive = 0.05;
  double negative = 0.95;

  void validate() const;
};

/// Mean elementwise smooth L1. gradients[0] is d/d(pred).
LossValue smooth_l1(std::span<const double> pred, std::span<const double> target,
                    double beta = 1.0);

/// -log softmax(logits)[label]. gradients[0] is softmax - onehot.
LossValue cross_entropy(std::span<const double> logits, int label);

/// 1 - cos(a, b). Throws std::invalid_argument if either vector is zero.
double cosine_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b);

struct PlnLoss {
  double value = 0.0;
  Eigen::MatrixXd grad_embeddings;  // same shape as embeddings
  Eigen::MatrixXd grad_prototypes;  // same shape as prototypes
};

/// Double-margin contrastive loss averaged over the batch. Rows of
/// `embeddings` are samples, rows of `prototypes` are classes. Per sample:
///
///   max(D_pos - m_p, 0) + max_{j != label} max(m_n - D_j, 0)
///
/// with D the cosine distance. The negative term is 0 when there is only one
/// prototype. Where several negatives tie for the maximum the lowest index
/// receives the subgradient.
PlnLoss pln_loss(const Eigen::Ref<const Eigen::MatrixXd>& embeddings, std::span<const int> labels,
                 const Eigen::Ref<const Eigen::MatrixXd>& prototypes, const Margins& margins);

/// lambda-weighted sum of (ctr, box1, iou, box2). Gradients of every part are
/// concatenated in that order, each scaled by its lambda.
LossValue cf_rpn_loss(const std::array<LossValue, 4>& parts, const LossWeights& w);

/// alpha * cf + beta * pln + gamma * cls.
double total_loss(double cf, double pln, double cls, const LossWeights& w);

}  // namespace osrcnn
