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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "osrcnn/losses.hpp"
#include "osrcnn/rng.hpp"

using namespace osrcnn;

using oracle::away_from_kinks;
using oracle::flatten;
using oracle::random_matrix;
using oracle::unflatten;

TEST_CASE("smooth l1 values") {
  const std::vector<double> a{1.0, -2.0, 3.0};
  const auto zero = smooth_l1(a, a);
  CHECK(zero.value == 0.0);
  for (double g : zero.gradients[0]) CHECK(g == 0.0);

  const std::vector<double> x{0.5}, x2{2.0}, t{0.0};
  CHECK(smooth_l1(x, t, 1.0).value == doctest::Approx(0.125));
  CHECK(smooth_l1(x2, t, 1.0).value == doctest::Approx(1.5));
  CHECK_THROWS_AS(smooth_l1(a, t), std::invalid_argument);
  CHECK_THROWS_AS(smooth_l1(x, t, 0.0), std::invalid_argument);
}

TEST_CASE("cross entropy values") {
  const std::vector<double> uniform{0.3, 0.3, 0.3, 0.3};
  CHECK(cross_entropy(uniform, 2).value == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  const std::vector<double> peaked{10.0, 0.0, 0.0};
  // -log(e^10 / (e^10 + 2)) = log(1 + 2 e^-10)
  CHECK(cross_entropy(peaked, 0).value ==
        doctest::Approx(std::log1p(2.0 * std::exp(-10.0))).epsilon(1e-12));
  CHECK(cross_entropy(peaked, 0).value == doctest::Approx(9.08e-5).epsilon(1e-3));

  CHECK_THROWS_AS(cross_entropy(peaked, 3), std::invalid_argument);
  CHECK_THROWS_AS(cross_entropy(peaked, -1), std::invalid_argument);
}

TEST_CASE("cross entropy gradient is softmax minus one-hot") {
  const std::vector<double> logits{1.0, 2.0, 3.0};
  const auto ce = cross_entropy(logits, 1);
  double sum = 0.0;
  for (double g : ce.gradients[0]) sum += g;
  CHECK(sum == doctest::Approx(0.0).epsilon(1e-15));
  const double denom = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(ce.gradients[0][0] == doctest::Approx(std::exp(1.0) / denom));
  CHECK(ce.gradients[0][1] == doctest::Approx(std::exp(2.0) / denom - 1.0));
}

TEST_CASE("pln loss hand-evaluated cases") {
  const Margins m{0.05, 0.95};

  SUBCASE("both hinges inactive") {
    Eigen::MatrixXd z(1, 2);
    z << 1.0, 0.0;
    Eigen::MatrixXd p(2, 2);
    p << 2.0, 0.0,  // D = 0
        0.0, 1.0;   // D = 1 > m_n
    const std::vector<int> y{0};
    const auto l = pln_loss(z, y, p, m);
    CHECK(l.value == 0.0);
    CHECK(l.grad_embeddings.isZero());
    CHECK(l.grad_prototypes.isZero());
  }

  SUBCASE("positive at 0.5, negative at 0.3") {
    Eigen::MatrixXd z(1, 2);
    z << 1.0, 0.0;
    Eigen::MatrixXd p(2, 2);
    p << 0.5, std::sqrt(0.75),  // cos 0.5 -> D 0.5
        0.7, std::sqrt(0.51);   // cos 0.7 -> D 0.3
    const std::vector<int> y{0};
    // (0.5 - 0.05) + (0.95 - 0.3)
    CHECK(pln_loss(z, y, p, m).value == doctest::Approx(1.10).epsilon(1e-12));
  }

  SUBCASE("single prototype has no negative term") {
    Eigen::MatrixXd z(1, 2);
    z << 1.0, 0.0;
    Eigen::MatrixXd p(1, 2);
    p << 0.5, std::sqrt(0.75);
    const std::vector<int> y{0};
    CHECK(pln_loss(z, y, p, m).value == doctest::Approx(0.45).epsilon(1e-12));
  }

  SUBCASE("batch mean") {
    Eigen::MatrixXd z(2, 2);
    z << 1.0, 0.0, 1.0, 0.0;
    Eigen::MatrixXd p(1, 2);
    p << 0.5, std::sqrt(0.75);
    const std::vector<int> y{0, 0};
    CHECK(pln_loss(z, y, p, m).value == doctest::Approx(0.45).epsilon(1e-12));
  }
}

TEST_CASE("pln loss rejects degenerate input") {
  const Margins m;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, 3);
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(2, 3);
  const std::vector<int> y{0};
  CHECK_THROWS_AS(pln_loss(z, y, p, m), std::invalid_argument);
  z(0, 0) = 1.0;
  p.row(1).setZero();
  CHECK_THROWS_AS(pln_loss(z, y, p, m), std::invalid_argument);
  p = Eigen::MatrixXd::Identity(2, 3);
  const std::vector<int> bad{2};
  CHECK_THROWS_AS(pln_loss(z, bad, p, m), std::invalid_argument);
}

TEST_CASE("pln loss is zero exactly when all distances satisfy the margins") {
  Rng rng(21);
  const Margins m;
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(4));
    const int n = 1 + static_cast<int>(rng.below(5));
    const Eigen::MatrixXd z = random_matrix(rng, n, 3);
    const Eigen::MatrixXd p = random_matrix(rng, k, 3);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(k));
    bool satisfied = true;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) {
        const double d = cosine_distance(z.row(i).transpose(), p.row(j).transpose());
        satisfied &= (j == y[i]) ? d <= m.positive : d >= m.negative;
      }
    }
    const double v = pln_loss(z, y, p, m).value;
    CHECK(v >= 0.0);
    CHECK((v == 0.0) == satisfied);
  }
}

TEST_CASE("pln loss is invariant to positive rescaling") {
  Rng rng(22);
  const Margins m;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd z = random_matrix(rng, 4, 5);
    Eigen::MatrixXd p = random_matrix(rng, 3, 5);
    const std::vector<int> y{0, 1, 2, 1};
    const double base = pln_loss(z, y, p, m).value;
    z.row(static_cast<Eigen::Index>(rng.below(4))) *= rng.uniform(0.01, 100.0);
    p.row(static_cast<Eigen::Index>(rng.below(3))) *= rng.uniform(0.01, 100.0);
    CHECK(pln_loss(z, y, p, m).value == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("pln loss gradients match central differences") {
  Rng rng(23);
  const Margins m;
  int checked = 0;
  while (checked < 100) {
    const int n = 1 + static_cast<int>(rng.below(4));
    const int k = 1 + static_cast<int>(rng.below(4));
    const int d = 2 + static_cast<int>(rng.below(5));
    const Eigen::MatrixXd z = random_matrix(rng, n, d);
    const Eigen::MatrixXd p = random_matrix(rng, k, d);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(k));
    if (!away_from_kinks(z, y, p, m)) continue;

    const auto l = pln_loss(z, y, p, m);
    const auto fz = oracle::central_difference(
        [&](const std::vector<double>& v) { return pln_loss(unflatten(v, n, d), y, p, m).value; },
        flatten(z));
    const auto fp = oracle::central_difference(
        [&](const std::vector<double>& v) { return pln_loss(z, y, unflatten(v, k, d), m).value; },
        flatten(p));
    CHECK(oracle::relative_error(flatten(l.grad_embeddings), fz) <= 1e-5);
    CHECK(oracle::relative_error(flatten(l.grad_prototypes), fp) <= 1e-5);
    ++checked;
  }
}

TEST_CASE("smooth l1 and cross entropy gradients match central differences") {
  Rng rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(8));
    std::vector<double> pred(n), target(n);
    const double beta = rng.uniform(0.2, 2.0);
    for (int i = 0; i < n; ++i) {
      target[i] = rng.normal();
      do {
        pred[i] = target[i] + 3.0 * rng.normal();
      } while (std::abs(std::abs(pred[i] - target[i]) - beta) < 1e-4);
    }
    const auto sl = smooth_l1(pred, target, beta);
    const auto fd = oracle::central_difference(
        [&](const std::vector<double>& v) { return smooth_l1(v, target, beta).value; }, pred);
    CHECK(oracle::relative_error(sl.gradients[0], fd) <= 1e-5);

    std::vector<double> logits(n + 1);
    for (auto& v : logits) v = 3.0 * rng.normal();
    const int label = static_cast<int>(rng.below(n + 1));
    const auto ce = cross_entropy(logits, label);
    const auto fce = oracle::central_difference(
        [&](const std::vector<double>& v) { return cross_entropy(v, label).value; }, logits);
    CHECK(oracle::relative_error(ce.gradients[0], fce) <= 1e-5);
  }
}

TEST_CASE("cf-rpn composite loss") {
  LossValue one;
  one.value = 1.0;
  one.gradients = {{1.0, -2.0}};
  const std::array<LossValue, 4> zeros{};
  CHECK(cf_rpn_loss(zeros, LossWeights::voc_coco()).value == 0.0);

  const std::array<LossValue, 4> ones{one, one, one, one};
  CHECK(cf_rpn_loss(ones, LossWeights::voc_coco()).value == doctest::Approx(2.0));
  const auto gn = cf_rpn_loss(ones, LossWeights::graspnet());
  CHECK(gn.value == doctest::Approx(14.0));
  REQUIRE(gn.gradients.size() == 4);
  CHECK(gn.gradients[1][1] == doctest::Approx(-20.0));

  LossWeights w = LossWeights::graspnet();
  const double before = cf_rpn_loss(ones, w).value;
  w.lambda[2] *= 2.0;
  CHECK(cf_rpn_loss(ones, w).value - before == doctest::Approx(1.0));

  LossValue negative;
  negative.value = -1.0;
  CHECK_THROWS_AS(cf_rpn_loss({negative, one, one, one}, w), std::invalid_argument);
}

TEST_CASE("total loss presets") {
  CHECK(total_loss(0, 0, 0, LossWeights::graspnet()) == 0.0);
  CHECK(total_loss(1, 1, 1, LossWeights::graspnet()) == doctest::Approx(4.0));
  CHECK(total_loss(1, 1, 1, LossWeights::voc_coco()) == doctest::Approx(2.3));
  LossWeights w = LossWeights::voc_coco();
  w.beta *= 2.0;
  CHECK(total_loss(1, 1, 1, w) == doctest::Approx(2.8));
}

TEST_CASE("weights and margins validation") {
  LossWeights w;
  w.lambda[3] = -1.0;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  CHECK_THROWS_AS((Margins{0.5, 0.4}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((Margins{0.05, 2.5}.validate()), std::invalid_argument);
  CHECK_NOTHROW(Margins{}.validate());
}
