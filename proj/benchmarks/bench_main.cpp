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
#include <benchmark/benchmark.h>

#include <vector>

#include "oracles.hpp"
#include "osrcnn/geometry.hpp"
#include "osrcnn/losses.hpp"
#include "osrcnn/pipeline.hpp"
#include "osrcnn/prototype.hpp"
#include "pipeline_scene.hpp"

namespace {

using namespace osrcnn;

void BM_Nms(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<Box> boxes;
  std::vector<double> scores;
  for (std::size_t i = 0; i < n; ++i) {
    boxes.push_back(oracle::random_box(rng, 800.0, 10.0, 200.0));
    scores.push_back(rng.uniform());
  }
  for (auto _ : state) benchmark::DoNotOptimize(nms(boxes, scores, 0.5));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Nms)->RangeMultiplier(4)->Range(64, 4096);

void BM_PlnLoss(benchmark::State& state) {
  Rng rng(2);
  const auto n = state.range(0);
  const int k = 20, d = 256;
  const Eigen::MatrixXd z = Eigen::MatrixXd::NullaryExpr(n, d, [&] { return rng.normal(); });
  const Eigen::MatrixXd p = Eigen::MatrixXd::NullaryExpr(k, d, [&] { return rng.normal(); });
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(rng.below(k));
  for (auto _ : state) benchmark::DoNotOptimize(pln_loss(z, y, p, Margins{}));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PlnLoss)->Arg(64)->Arg(512);

PrototypeModel random_model(int k, int d_f, int d_z, int d_r) {
  Rng rng(3);
  auto mat = [&](int r, int c) {
    return Eigen::MatrixXd(Eigen::MatrixXd::NullaryExpr(r, c, [&] { return 0.1 * rng.normal(); }));
  };
  PrototypeModel m;
  m.encoder_weight = mat(d_z, d_f);
  m.encoder_bias = Eigen::VectorXd::Zero(d_z);
  m.prototypes = mat(k, d_z);
  m.remap_weight = mat(d_r, d_z);
  m.remap_bias = Eigen::VectorXd::Zero(d_r);
  m.classifier_weight = mat(k, d_r);
  m.classifier_bias = Eigen::VectorXd::Zero(k);
  return m;
}

void BM_RunInference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = random_model(8, 64, 256, 1024);
  const auto props = scene::make_scene(n, 8, 64, 4);
  const PipelineConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(run_inference(props, model, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_RunInference)->Arg(200)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
