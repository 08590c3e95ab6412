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
#include "osrcnn/prototype.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "osrcnn/errors.hpp"
#include "osrcnn/rng.hpp"

namespace osrcnn {
namespace {

Eigen::MatrixXd uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double bound) {
  Eigen::MatrixXd m(rows, cols);
  // Row-major fill order so the draw sequence does not depend on storage order.
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  return m;
}

Eigen::VectorXd uniform_vector(Rng& rng, Eigen::Index n, double bound) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(-bound, bound);
  return v;
}

void check_shape(const char* name, Eigen::Index rows, Eigen::Index cols, Eigen::Index want_rows,
                 Eigen::Index want_cols) {
  if (rows != want_rows || cols != want_cols) {
    throw DimensionError(std::string(name) + " is " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", expected " + std::to_string(want_rows) + "x" +
                         std::to_string(want_cols));
  }
}

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

struct Forward {
  Eigen::MatrixXd z_pre;   // B x d_z
  Eigen::MatrixXd z;       // relu(z_pre)
  Eigen::MatrixXd r_pre;   // B x d_r
  Eigen::MatrixXd r;       // relu(r_pre)
  Eigen::MatrixXd logits;  // B x K
};

Forward forward(const PrototypeModel& m, const Eigen::Ref<const Eigen::MatrixXd>& features) {
  Forward fw;
  fw.z_pre = (features * m.encoder_weight.transpose()).rowwise() + m.encoder_bias.transpose();
  fw.z = fw.z_pre.cwiseMax(0.0);
  fw.r_pre = (fw.z * m.remap_weight.transpose()).rowwise() + m.remap_bias.transpose();
  fw.r = fw.r_pre.cwiseMax(0.0);
  fw.logits = (fw.r * m.classifier_weight.transpose()).rowwise() + m.classifier_bias.transpose();
  return fw;
}

}  // namespace

ModelDims PrototypeModel::dims() const {
  return {static_cast<int>(encoder_weight.cols()), static_cast<int>(encoder_weight.rows()),
          static_cast<int>(remap_weight.rows()), static_cast<int>(prototypes.rows())};
}

void PrototypeModel::validate() const {
  const auto d = dims();
  if (d.num_classes < 1) throw DimensionError("model needs at least one prototype");
  check_shape("encoder_bias", encoder_bias.rows(), 1, d.embedding_dim, 1);
  check_shape("prototypes", prototypes.rows(), prototypes.cols(), d.num_classes, d.embedding_dim);
  check_shape("remap_weight", remap_weight.rows(), remap_weight.cols(), d.remap_dim,
              d.embedding_dim);
  check_shape("remap_bias", remap_bias.rows(), 1, d.remap_dim, 1);
  check_shape("classifier_weight", classifier_weight.rows(), classifier_weight.cols(),
              d.num_classes, d.remap_dim);
  check_shape("classifier_bias", classifier_bias.rows(), 1, d.num_classes, 1);
  for (Eigen::Index j = 0; j < prototypes.rows(); ++j) {
    if (prototypes.row(j).norm() == 0.0) {
      throw std::invalid_argument("prototype " + std::to_string(j) + " has zero norm");
    }
  }
  const bool finite = encoder_weight.allFinite() && encoder_bias.allFinite() &&
                      prototypes.allFinite() && remap_weight.allFinite() &&
                      remap_bias.allFinite() && classifier_weight.allFinite() &&
                      classifier_bias.allFinite();
  if (!finite) throw std::invalid_argument("model weights contain non-finite values");
  margins.validate();
}

PrototypeModel PrototypeModel::initialize(const ModelDims& d, std::uint64_t seed) {
  if (d.feature_dim < 1 || d.embedding_dim < 1 || d.remap_dim < 1 || d.num_classes < 1) {
    throw DimensionError("model dimensions must be positive");
  }
  Rng rng(seed);
  PrototypeModel m;
  const double enc_bound = 1.0 / std::sqrt(static_cast<double>(d.feature_dim));
  const double emb_bound = 1.0 / std::sqrt(static_cast<double>(d.embedding_dim));
  const double rem_bound = 1.0 / std::sqrt(static_cast<double>(d.remap_dim));

  m.encoder_weight = uniform_matrix(rng, d.embedding_dim, d.feature_dim, enc_bound);
  m.encoder_bias = uniform_vector(rng, d.embedding_dim, enc_bound);

  m.prototypes.resize(d.num_classes, d.embedding_dim);
  for (int j = 0; j < d.num_classes; ++j) {
    double norm = 0.0;
    do {
      for (int c = 0; c < d.embedding_dim; ++c) m.prototypes(j, c) = rng.normal();
      norm = m.prototypes.row(j).norm();
    } while (norm == 0.0);
    m.prototypes.row(j) /= norm;
  }

  m.remap_weight = uniform_matrix(rng, d.remap_dim, d.embedding_dim, emb_bound);
  m.remap_bias = uniform_vector(rng, d.remap_dim, emb_bound);
  m.classifier_weight = uniform_matrix(rng, d.num_classes, d.remap_dim, rem_bound);
  m.classifier_bias = uniform_vector(rng, d.num_classes, rem_bound);
  return m;
}

int OpenSetLabel::predicted_class() const {
  if (!known || !class_scores) return -1;
  Eigen::Index best = 0;
  class_scores->maxCoeff(&best);
  return static_cast<int>(best);
}

Eigen::VectorXd encode(const PrototypeModel& model,
                       const Eigen::Ref<const Eigen::VectorXd>& feature) {
  if (feature.size() != model.encoder_weight.cols()) {
    throw DimensionError("feature has dimension " + std::to_string(feature.size()) +
                         ", model expects " + std::to_string(model.encoder_weight.cols()));
  }
  return (model.encoder_weight * feature + model.encoder_bias).cwiseMax(0.0);
}

Eigen::MatrixXd encode_batch(const PrototypeModel& model,
                             const Eigen::Ref<const Eigen::MatrixXd>& features) {
  if (features.cols() != model.encoder_weight.cols()) {
    throw DimensionError("features have dimension " + std::to_string(features.cols()) +
                         ", model expects " + std::to_string(model.encoder_weight.cols()));
  }
  return ((features * model.encoder_weight.transpose()).rowwise() +
          model.encoder_bias.transpose())
      .cwiseMax(0.0);
}

Eigen::VectorXd softmax_classify(const PrototypeModel& model,
                                 const Eigen::Ref<const Eigen::VectorXd>& embedding) {
  if (embedding.size() != model.remap_weight.cols()) {
    throw DimensionError("embedding has dimension " + std::to_string(embedding.size()) +
                         ", model expects " + std::to_string(model.remap_weight.cols()));
  }
  const Eigen::VectorXd r = (model.remap_weight * embedding + model.remap_bias).cwiseMax(0.0);
  return softmax(model.classifier_weight * r + model.classifier_bias);
}

OpenSetLabel classify_open_set(const PrototypeModel& model,
                               const Eigen::Ref<const Eigen::VectorXd>& embedding) {
  if (embedding.size() != model.prototypes.cols()) {
    throw DimensionError("embedding has dimension " + std::to_string(embedding.size()) +
                         ", model expects " + std::to_string(model.prototypes.cols()));
  }
  const double zn = embedding.norm();
  if (zn == 0.0) throw std::invalid_argument("classify_open_set: zero-norm embedding");

  OpenSetLabel out;
  out.min_distance = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < model.prototypes.rows(); ++j) {
    const auto p = model.prototypes.row(j);
    const double d = 1.0 - embedding.dot(p.transpose()) / (zn * p.norm());
    if (d < out.min_distance) {
      out.min_distance = d;
      out.nearest_prototype = static_cast<int>(j);
    }
  }
  out.known = !(out.min_distance > model.unknown_threshold);
  if (out.known) out.class_scores = softmax_classify(model, embedding);
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be nonnegative");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
  if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
  if (embedding_dim < 1 || remap_dim < 1) throw DimensionError("dimensions must be positive");
  if (trace_interval < 1) throw std::invalid_argument("trace interval must be positive");
  margins.validate();
  weights.validate();
}

JointObjective joint_objective(const PrototypeModel& model,
                               const Eigen::Ref<const Eigen::MatrixXd>& features,
                               std::span<const int> labels, std::span<const double> ious,
                               const TrainConfig& cfg) {
  const auto n = features.rows();
  if (static_cast<std::size_t>(n) != labels.size() || labels.size() != ious.size()) {
    throw std::invalid_argument("joint_objective: batch arrays differ in length");
  }
  if (features.cols() != model.encoder_weight.cols()) {
    throw DimensionError("joint_objective: feature dimension mismatch");
  }
  const Forward fw = forward(model, features);
  const auto k = model.prototypes.rows();

  JointObjective out;
  Eigen::MatrixXd grad_z = Eigen::MatrixXd::Zero(n, fw.z.cols());

  // Contrastive term over well-localized proposals with a usable embedding.
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ious[i] > cfg.iou_threshold && fw.z.row(i).squaredNorm() > 0.0) rows.push_back(i);
  }
  Eigen::MatrixXd grad_p = Eigen::MatrixXd::Zero(k, model.prototypes.cols());
  if (!rows.empty()) {
    Eigen::MatrixXd z_sel(rows.size(), fw.z.cols());
    std::vector<int> sel_labels(rows.size());
    for (std::size_t s = 0; s < rows.size(); ++s) {
      z_sel.row(s) = fw.z.row(rows[s]);
      sel_labels[s] = labels[rows[s]];
    }
    const PlnLoss pln = pln_loss(z_sel, sel_labels, model.prototypes, model.margins);
    out.pln = pln.value;
    grad_p = cfg.weights.beta * pln.grad_prototypes;
    for (std::size_t s = 0; s < rows.size(); ++s) {
      grad_z.row(rows[s]) += cfg.weights.beta * pln.grad_embeddings.row(s);
    }
  }

  // Softmax classification term over every row.
  Eigen::MatrixXd grad_logits(n, k);
  double ce_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= k) throw std::invalid_argument("joint_objective: label out of range");
    const Eigen::VectorXd row = fw.logits.row(i).transpose();
    const auto ce = cross_entropy(std::span<const double>(row.data(), row.size()), y);
    ce_sum += ce.value;
    grad_logits.row(i) = Eigen::Map<const Eigen::RowVectorXd>(ce.gradients[0].data(), k);
  }
  if (n > 0) {
    out.cls = ce_sum / static_cast<double>(n);
    grad_logits *= cfg.weights.gamma / static_cast<double>(n);
  }
  out.total = cfg.weights.beta * out.pln + cfg.weights.gamma * out.cls;

  auto& g = out.gradients;
  g.classifier_weight = grad_logits.transpose() * fw.r;
  g.classifier_bias = grad_logits.colwise().sum().transpose();
  const Eigen::MatrixXd grad_r_pre =
      (grad_logits * model.classifier_weight).cwiseProduct((fw.r_pre.array() > 0.0).cast<double>().matrix());
  g.remap_weight = grad_r_pre.transpose() * fw.z;
  g.remap_bias = grad_r_pre.colwise().sum().transpose();
  grad_z += grad_r_pre * model.remap_weight;
  const Eigen::MatrixXd grad_z_pre =
      grad_z.cwiseProduct((fw.z_pre.array() > 0.0).cast<double>().matrix());
  g.encoder_weight = grad_z_pre.transpose() * features;
  g.encoder_bias = grad_z_pre.colwise().sum().transpose();
  g.prototypes = std::move(grad_p);
  return out;
}

TrainResult train_pln(std::span<const TrainRecord> records, int num_classes,
                      const TrainConfig& cfg) {
  cfg.validate();
  if (num_classes < 1) throw std::invalid_argument("train_pln: need at least one class");
  if (records.empty()) throw std::invalid_argument("train_pln: no training records");

  const auto d_f = records.front().feature.size();
  std::vector<int> per_class(num_classes, 0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.feature.size() != d_f) {
      throw DimensionError("train_pln: record " + std::to_string(i) + " has feature dimension " +
                           std::to_string(r.feature.size()) + ", expected " +
                           std::to_string(d_f));
    }
    if (r.label < 0 || r.label >= num_classes) {
      throw std::invalid_argument("train_pln: record " + std::to_string(i) + " label " +
                                  std::to_string(r.label) + " out of range");
    }
    ++per_class[r.label];
  }
  for (int c = 0; c < num_classes; ++c) {
    if (per_class[c] == 0) {
      throw std::invalid_argument("train_pln: class " + std::to_string(c) + " has no records");
    }
  }

  const auto n = static_cast<Eigen::Index>(records.size());
  Eigen::MatrixXd features(n, d_f);
  std::vector<int> labels(records.size());
  std::vector<double> ious(records.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    features.row(i) = records[i].feature.transpose();
    labels[i] = records[i].label;
    ious[i] = records[i].iou;
  }

  TrainResult result;
  PrototypeModel& model = result.model;
  model = PrototypeModel::initialize(
      {static_cast<int>(d_f), cfg.embedding_dim, cfg.remap_dim, num_classes}, mix_seed(cfg.seed, 0));
  model.margins = cfg.margins;
  model.unknown_threshold = cfg.unknown_threshold;

  auto record_trace = [&](int step) {
    const JointObjective full = joint_objective(model, features, labels, ious, cfg);
    if (!std::isfinite(full.total)) {
      throw TrainingError("train_pln: non-finite loss at step " + std::to_string(step) +
                          " (pln=" + std::to_string(full.pln) + ", cls=" +
                          std::to_string(full.cls) + ")");
    }
    result.trace.push_back({step, full.pln, full.cls, full.total});
  };

  ModelGradients velocity;
  auto sgd = [&](auto& param, const auto& grad, auto& vel) {
    if (cfg.momentum > 0.0) {
      if (vel.size() == 0) vel = std::remove_reference_t<decltype(vel)>::Zero(grad.rows(), grad.cols());
      vel = cfg.momentum * vel + grad;
      param -= cfg.learning_rate * vel;
    } else {
      param -= cfg.learning_rate * grad;
    }
  };

  Rng rng(mix_seed(cfg.seed, 1));
  std::vector<std::size_t> order = rng.permutation(records.size());
  std::size_t cursor = 0;
  const auto batch = std::min<std::size_t>(cfg.batch_size, records.size());
  Eigen::MatrixXd batch_features(batch, d_f);
  std::vector<int> batch_labels(batch);
  std::vector<double> batch_ious(batch);

  record_trace(0);
  for (int step = 0; step < cfg.steps; ++step) {
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        order = rng.permutation(records.size());
        cursor = 0;
      }
      const std::size_t idx = order[cursor++];
      batch_features.row(b) = features.row(idx);
      batch_labels[b] = labels[idx];
      batch_ious[b] = ious[idx];
    }
    const JointObjective obj = joint_objective(model, batch_features, batch_labels, batch_ious, cfg);
    if (!std::isfinite(obj.total)) {
      throw TrainingError("train_pln: non-finite batch loss at step " + std::to_string(step));
    }
    const auto& g = obj.gradients;
    sgd(model.encoder_weight, g.encoder_weight, velocity.encoder_weight);
    sgd(model.encoder_bias, g.encoder_bias, velocity.encoder_bias);
    sgd(model.prototypes, g.prototypes, velocity.prototypes);
    sgd(model.remap_weight, g.remap_weight, velocity.remap_weight);
    sgd(model.remap_bias, g.remap_bias, velocity.remap_bias);
    sgd(model.classifier_weight, g.classifier_weight, velocity.classifier_weight);
    sgd(model.classifier_bias, g.classifier_bias, velocity.classifier_bias);

    const int done = step + 1;
    if (done % cfg.trace_interval == 0 || done == cfg.steps) record_trace(done);
  }
  return result;
}

}  // namespace osrcnn
