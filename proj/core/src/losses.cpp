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
#include "osrcnn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace osrcnn {

void LossWeights::validate() const {
  if (!(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0)) {
    throw std::invalid_argument("loss weights alpha/beta/gamma must be nonnegative");
  }
  for (double l : lambda) {
    if (!(l >= 0.0)) throw std::invalid_argument("loss weights lambda1..4 must be nonnegative");
  }
}

void Margins::validate() const {
  if (!(positive >= 0.0 && positive <= 2.0 && negative >= 0.0 && negative <= 2.0)) {
    throw std::invalid_argument("margins must lie in [0, 2]");
  }
  if (!(positive < negative)) {
    throw std::invalid_argument("positive margin must be smaller than negative margin");
  }
}

LossValue smooth_l1(std::span<const double> pred, std::span<const double> target, double beta) {
  if (pred.size() != target.size()) {
    throw std::invalid_argument("smooth_l1: pred has " + std::to_string(pred.size()) +
                                " elements, target " + std::to_string(target.size()));
  }
  if (!(beta > 0.0)) throw std::invalid_argument("smooth_l1: beta must be positive");

  LossValue out;
  out.gradients.emplace_back(pred.size(), 0.0);
  if (pred.empty()) return out;

  auto& grad = out.gradients[0];
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double x = pred[i] - target[i];
    if (std::abs(x) < beta) {
      sum += 0.5 * x * x / beta;
      grad[i] = x / beta * inv_n;
    } else {
      sum += std::abs(x) - 0.5 * beta;
      grad[i] = (x > 0.0 ? 1.0 : -1.0) * inv_n;
    }
  }
  out.value = sum * inv_n;
  return out;
}

LossValue cross_entropy(std::span<const double> logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw std::invalid_argument("cross_entropy: label " + std::to_string(label) +
                                " out of range for " + std::to_string(logits.size()) + " classes");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double v : logits) denom += std::exp(v - mx);
  const double log_denom = std::log(denom);

  LossValue out;
  out.value = -(logits[label] - mx - log_denom);
  auto& grad = out.gradients.emplace_back(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) grad[k] = std::exp(logits[k] - mx - log_denom);
  grad[label] -= 1.0;
  return out;
}

double cosine_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine_distance: dimension mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine_distance: zero-norm vector");
  return 1.0 - a.dot(b) / (na * nb);
}

PlnLoss pln_loss(const Eigen::Ref<const Eigen::MatrixXd>& embeddings, std::span<const int> labels,
                 const Eigen::Ref<const Eigen::MatrixXd>& prototypes, const Margins& margins) {
  const auto n = embeddings.rows();
  const auto k = prototypes.rows();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw std::invalid_argument("pln_loss: embeddings/labels size mismatch");
  }
  if (k < 1) throw std::invalid_argument("pln_loss: need at least one prototype");
  if (embeddings.cols() != prototypes.cols()) {
    throw std::invalid_argument("pln_loss: embedding and prototype dimensions differ");
  }

  PlnLoss out;
  out.grad_embeddings = Eigen::MatrixXd::Zero(n, embeddings.cols());
  out.grad_prototypes = Eigen::MatrixXd::Zero(k, prototypes.cols());
  if (n == 0) return out;

  const Eigen::VectorXd z_norm = embeddings.rowwise().norm();
  const Eigen::VectorXd p_norm = prototypes.rowwise().norm();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (p_norm(j) == 0.0) {
      throw std::invalid_argument("pln_loss: prototype " + std::to_string(j) + " has zero norm");
    }
  }
  // cos(i, j) for every pair in one product.
  const Eigen::MatrixXd cosine =
      (embeddings * prototypes.transpose()).array().colwise() / z_norm.array();
  const double inv_n = 1.0 / static_cast<double>(n);

  // Accumulates the gradient of  sign * D(i, j)  where D = 1 - cos.
  auto add_distance_grad = [&](Eigen::Index i, Eigen::Index j, double cos_ij, double sign) {
    const double scale = sign * inv_n;
    const auto z = embeddings.row(i);
    const auto p = prototypes.row(j);
    const double nz = z_norm(i);
    const double np = p_norm(j);
    // dcos/dz = p/(|z||p|) - cos z/|z|^2 ; dD = -dcos
    out.grad_embeddings.row(i) -= scale * (p / (nz * np) - cos_ij * z / (nz * nz));
    out.grad_prototypes.row(j) -= scale * (z / (nz * np) - cos_ij * p / (np * np));
  };

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= k) {
      throw std::invalid_argument("pln_loss: label " + std::to_string(y) + " out of range");
    }
    if (z_norm(i) == 0.0) {
      throw std::invalid_argument("pln_loss: embedding " + std::to_string(i) + " has zero norm");
    }
    const double cos_pos = cosine(i, y) / p_norm(y);
    const double d_pos = 1.0 - cos_pos;
    if (d_pos > margins.positive) {
      total += d_pos - margins.positive;
      add_distance_grad(i, y, cos_pos, +1.0);
    }

    double worst = 0.0;
    Eigen::Index worst_j = -1;
    double worst_cos = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == y) continue;
      const double cos_j = cosine(i, j) / p_norm(j);
      const double hinge = margins.negative - (1.0 - cos_j);
      if (hinge > worst) {
        worst = hinge;
        worst_j = j;
        worst_cos = cos_j;
      }
    }
    if (worst_j >= 0) {
      total += worst;
      add_distance_grad(i, worst_j, worst_cos, -1.0);
    }
  }
  out.value = total * inv_n;
  return out;
}

LossValue cf_rpn_loss(const std::array<LossValue, 4>& parts, const LossWeights& w) {
  LossValue out;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (!(parts[p].value >= 0.0)) {
      throw std::invalid_argument("cf_rpn_loss: part " + std::to_string(p) + " is negative");
    }
    out.value += w.lambda[p] * parts[p].value;
    for (const auto& g : parts[p].gradients) {
      auto& scaled = out.gradients.emplace_back(g);
      for (double& v : scaled) v *= w.lambda[p];
    }
  }
  return out;
}

double total_loss(double cf, double pln, double cls, const LossWeights& w) {
  if (!(cf >= 0.0 && pln >= 0.0 && cls >= 0.0)) {
    throw std::invalid_argument("total_loss: loss parts must be nonnegative");
  }
  return w.alpha * cf + w.beta * pln + w.gamma * cls;
}

}  // namespace osrcnn
