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
#include <exception>
#include <iostream>
#include <thread>

#include "options.hpp"

namespace osrcnn::cli {

namespace {

struct InferArgs {
  std::string proposals;
  std::string model;
  std::string output = "detections.json";
  double t_u = -1.0;  // negative: take the threshold stored in the model
  PipelineConfig cfg;
};

// Images are dealt round-robin to the workers; results land in per-image
// slots, so the output does not depend on the worker count.
std::vector<ImageDetections> infer_all(const std::vector<ImageProposals>& images,
                                       const PrototypeModel& model, const PipelineConfig& cfg,
                                       unsigned workers) {
  std::vector<ImageDetections> out(images.size());
  std::vector<std::exception_ptr> errors(images.size());
  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < images.size(); i += workers) {
      try {
        out[i] = {images[i].image_id, run_inference(images[i].proposals, model, cfg)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace

Command add_infer(CLI::App& root, const Globals& g, const OptionSet& global_opts) {
  auto* app = root.add_subcommand("infer", "Turn scored proposals into open-set detections");
  auto a = std::make_shared<InferArgs>();
  auto opts = std::make_shared<OptionSet>(app);
  auto& c = a->cfg;
  opts->add("proposals", a->proposals, "Proposal-feature file (JSON lines)")->required();
  opts->add("model", a->model, "Checkpoint written by train")->required();
  opts->add("output", a->output, "Detections file name inside --out-dir");
  opts->add("pre-nms-topk", c.pre_nms_topk, "Proposals kept by centerness before NMS")
      ->check(CLI::PositiveNumber);
  opts->add("nms-thresh", c.nms_thresh, "IoU threshold of the proposal NMS")->check(CLI::Range(0.0, 1.0));
  opts->add("objectness-floor", c.objectness_floor, "Drop proposals with objectness below this")
      ->check(CLI::Range(0.0, 1.0));
  opts->add("t-u", a->t_u, "Unknown distance threshold T_u; negative uses the model's")
      ->check(CLI::Range(-1.0, 2.0));
  opts->add("per-group-topk", c.per_group_topk, "Detections kept per group (known, unknown)")
      ->check(CLI::PositiveNumber);
  opts->add("group-nms-thresh", c.group_nms_thresh, "IoU threshold of the per-group NMS")
      ->check(CLI::Range(0.0, 1.0));

  auto run = [&g, &global_opts, a, opts]() {
    const auto ckpt = load_checkpoint(a->model);
    if (a->t_u < 0.0) a->t_u = ckpt.model.unknown_threshold;
    a->cfg.unknown_threshold = a->t_u;
    a->cfg.validate();
    const auto images = read_proposal_file(a->proposals);
    const auto dets = infer_all(images, ckpt.model, a->cfg, g.workers);

    const auto dir = prepare_out_dir(g);
    write_detections(dir / a->output, dets, full_echo("infer", global_opts, *opts));
    std::size_t known = 0, unknown = 0;
    for (const auto& im : dets)
      for (const auto& d : im.detections) (d.label == kUnknownClass ? unknown : known)++;
    std::cout << images.size() << " images: " << known << " known and " << unknown
              << " unknown detections\nwrote " << (dir / a->output).string() << "\n";
    return static_cast<int>(kOk);
  };
  return {app, run};
}

}  // namespace osrcnn::cli
