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

// Prototype learning over proposal features.
//
// A proposal feature f (d_f) is encoded to an embedding z = relu(W_e f + b_e)
// (d_z). Each known class owns one learnable prototype direction; an embedding
// whose smallest cosine distance to the prototypes exceeds t_u is declared
// unknown. Known embeddings are remapped, r = relu(W_r z + b_r) (d_r), and
// classified by a K-way softmax over W_c r + b_c.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "osrcnn/losses.hpp"

namespace osrcnn {

struct ModelDims {
  int feature_dim = 1024;  // d_f
  int embedding_dim = 256;  // d_z
  int remap_dim = 1024;    // d_r
  int num_classes = 1;     // K

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

struct PrototypeModel {
  Eigen::MatrixXd encoder_weight;     // d_z x d_f
  Eigen::VectorXd encoder_bias;       // d_z
  Eigen::MatrixXd prototypes;         // K x d_z, one row per class
  Eigen::MatrixXd remap_weight;       // d_r x d_z
  Eigen::VectorXd remap_bias;         // d_r
  Eigen::MatrixXd classifier_weight;  // K x d_r
  Eigen::VectorXd classifier_bias;    // K
  Margins margins;
  double unknown_threshold = 0.17;    // t_u

  ModelDims dims() const;

  /// Throws DimensionError on inconsistent shapes and std::invalid_argument
  /// on zero prototypes or non-finite weights.
  void validate() const;

  /// Unit-norm random prototypes; every affine layer drawn from
  /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static PrototypeModel initialize(const ModelDims& dims, std::uint64_t seed);
};

/// Outcome of open-set identification for one embedding.
struct OpenSetLabel {
  bool known = false;
  int nearest_prototype = -1;
  double min_distance = 0.0;
  std::optional<Eigen::VectorXd> class_scores;  // softmax, known only

  /// argmax of class_scores for known labels, -1 for unknown.
  int predicted_class() const;
};

Eigen::VectorXd encode(const PrototypeModel& model, const Eigen::Ref<const Eigen::VectorXd>& feature);

/// Row-wise encode; rows of `features` are samples.
Eigen::MatrixXd encode_batch(const PrototypeModel& model,
                             const Eigen::Ref<const Eigen::MatrixXd>& features);

/// Unknown iff the smallest prototype distance is strictly greater than the
/// model's unknown threshold. Throws std::invalid_argument on a zero embedding.
OpenSetLabel classify_open_set(const PrototypeModel& model,
                               const Eigen::Ref<const Eigen::VectorXd>& embedding);

Eigen::VectorXd softmax_classify(const PrototypeModel& model,
                                 const Eigen::Ref<const Eigen::VectorXd>& embedding);

struct TrainRecord {
  Eigen::VectorXd feature;
  int label = 0;
  double iou = 1.0;  // IoU of the source proposal with its ground truth
};

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.0;
  int steps = 1000;
  int batch_size = 64;
  Margins margins;
  double iou_threshold = 0.5;  // t_iou: records above it enter the contrastive loss
  double unknown_threshold = 0.17;
  LossWeights weights;
  int embedding_dim = 256;
  int remap_dim = 1024;
  int trace_interval = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ModelGradients {
  Eigen::MatrixXd encoder_weight;
  Eigen::VectorXd encoder_bias;
  Eigen::MatrixXd prototypes;
  Eigen::MatrixXd remap_weight;
  Eigen::VectorXd remap_bias;
  Eigen::MatrixXd classifier_weight;
  Eigen::VectorXd classifier_bias;
};

struct JointObjective {
  double pln = 0.0;    // contrastive loss over the rows with iou > t_iou
  double cls = 0.0;    // mean cross entropy over all rows
  double total = 0.0;  // beta * pln + gamma * cls
  ModelGradients gradients;
};

/// The training objective on one batch, with gradients for every parameter.
JointObjective joint_objective(const PrototypeModel& model,
                               const Eigen::Ref<const Eigen::MatrixXd>& features,
                               std::span<const int> labels, std::span<const double> ious,
                               const TrainConfig& cfg);

struct TracePoint {
  int step = 0;
  double pln = 0.0;
  double cls = 0.0;
  double total = 0.0;
};

struct TrainResult {
  PrototypeModel model;
  std::vector<TracePoint> trace;  // full-dataset objective, first and last step included
};

/// Minibatch SGD on beta * L_pln + gamma * L_cls. Deterministic for a given
/// seed. Throws std::invalid_argument for an empty class or inconsistent
/// feature dimensions and TrainingError when the loss becomes non-finite.
TrainResult train_pln(std::span<const TrainRecord> records, int num_classes, const TrainConfig& cfg);

}  // namespace osrcnn
