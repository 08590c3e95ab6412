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
#include <cstdio>
#include <iostream>

#include "options.hpp"
#include "osrcnn/rng.hpp"
#include "osrcnn/sampler.hpp"

namespace osrcnn::cli {

namespace {

struct TrainArgs {
  std::string train;
  std::string output = "model.json";
  int num_classes = 0;
  TrainConfig cfg;
  SamplingRegime ctr = SamplingRegime::centerness();
  SamplingRegime ltrb = SamplingRegime::ltrb();
  SamplingRegime ref = SamplingRegime::refinement();
};

void add_regime(OptionSet& opts, const std::string& prefix, SamplingRegime& r,
                const std::string& what) {
  opts.add(prefix + "-ns", r.n_s, "Sampled proposals per image (" + what + ")")
      ->check(CLI::PositiveNumber);
  opts.add(prefix + "-tpos", r.t_pos, "Positive IoU threshold (" + what + ")")->check(CLI::Range(0.0, 1.0));
  opts.add(prefix + "-tneg", r.t_neg, "Negative IoU threshold (" + what + ")")->check(CLI::Range(0.0, 1.0));
  opts.add(prefix + "-ppos", r.p_pos, "Positive fraction (" + what + ")")->check(CLI::Range(0.0, 1.0));
}

// Positive-matched proposals of the refinement regime become training
// records labelled with their ground truth class.
std::vector<TrainRecord> collect_records(const std::vector<ImageProposals>& images,
                                         const SamplingRegime& regime, std::uint64_t seed) {
  std::vector<TrainRecord> out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    std::vector<Box> boxes;
    for (const auto& p : img.proposals) boxes.push_back(p.refined_box);
    std::vector<Box> gt_boxes;
    std::vector<int> gt_labels;
    for (const auto& g : img.gt) {
      if (g.category_id < 0) continue;
      gt_boxes.push_back(g.box);
      gt_labels.push_back(g.category_id);
    }
    const auto match = match_proposals(boxes, gt_boxes, regime);
    for (auto k : sample_minibatch(match, regime, mix_seed(seed, i))) {
      if (match.status[k] != MatchStatus::kPositive) continue;
      out.push_back({img.proposals[k].feature, gt_labels[*match.matched_gt[k]], match.max_iou[k]});
    }
  }
  return out;
}

}  // namespace

Command add_train(CLI::App& root, const Globals& g, const OptionSet& global_opts) {
  auto* app = root.add_subcommand("train", "Train the prototype network on proposal features");
  auto a = std::make_shared<TrainArgs>();
  auto opts = std::make_shared<OptionSet>(app);
  auto& c = a->cfg;
  opts->add("train", a->train, "Proposal-feature file (JSON lines) with ground truth")->required();
  opts->add("output", a->output, "Checkpoint file name inside --out-dir");
  opts->add("num-classes", a->num_classes, "Known classes; 0 infers it from the labels")
      ->check(CLI::NonNegativeNumber);
  opts->add("lr", c.learning_rate, "SGD learning rate")->check(CLI::NonNegativeNumber);
  opts->add("momentum", c.momentum, "SGD momentum")->check(CLI::Range(0.0, 0.999));
  opts->add("steps", c.steps, "SGD steps")->check(CLI::NonNegativeNumber);
  opts->add("batch-size", c.batch_size, "Records per step")->check(CLI::PositiveNumber);
  opts->add("embedding-dim", c.embedding_dim, "Embedding dimension d_z")->check(CLI::PositiveNumber);
  opts->add("remap-dim", c.remap_dim, "Remapped feature dimension")->check(CLI::PositiveNumber);
  opts->add("trace-interval", c.trace_interval, "Steps between loss trace points")
      ->check(CLI::PositiveNumber);
  opts->add("m-p", c.margins.positive, "Positive margin m_p")->check(CLI::Range(0.0, 2.0));
  opts->add("m-n", c.margins.negative, "Negative margin m_n")->check(CLI::Range(0.0, 2.0));
  opts->add("t-u", c.unknown_threshold, "Unknown distance threshold T_u")->check(CLI::Range(0.0, 2.0));
  opts->add("t-iou", c.iou_threshold, "IoU above which records enter the contrastive loss")
      ->check(CLI::Range(0.0, 1.0));
  opts->add("alpha", c.weights.alpha, "Weight of the proposal loss")->check(CLI::NonNegativeNumber);
  opts->add("beta", c.weights.beta, "Weight of the contrastive loss")->check(CLI::NonNegativeNumber);
  opts->add("gamma", c.weights.gamma, "Weight of the classification loss")->check(CLI::NonNegativeNumber);
  for (int i = 0; i < 4; ++i) {
    opts->add("lambda" + std::to_string(i + 1), c.weights.lambda[i],
              "Weight of proposal loss term " + std::to_string(i + 1))
        ->check(CLI::NonNegativeNumber);
  }
  add_regime(*opts, "ctr", a->ctr, "centerness regime");
  add_regime(*opts, "ltrb", a->ltrb, "ltrb regime");
  add_regime(*opts, "ref", a->ref, "refinement regime");

  auto run = [&g, &global_opts, a, opts]() {
    auto& cfg = a->cfg;
    cfg.seed = g.seed;
    cfg.validate();
    a->ctr.validate();
    a->ltrb.validate();
    a->ref.validate();

    const auto images = read_proposal_file(a->train);
    const auto records = collect_records(images, a->ref, mix_seed(g.seed, 2));
    if (records.empty()) throw std::invalid_argument(a->train + ": no positive proposals to train on");
    int k = a->num_classes;
    if (k == 0) {
      for (const auto& r : records) k = std::max(k, r.label + 1);
    }
    std::cout << "training on " << records.size() << " records from " << images.size()
              << " images, " << k << " classes\n";

    const auto result = train_pln(records, k, cfg);
    for (const auto& t : result.trace) {
      char line[128];
      std::snprintf(line, sizeof(line), "step %6d  pln %.6f  cls %.6f  total %.6f\n", t.step, t.pln,
                    t.cls, t.total);
      std::cout << line;
    }
    const auto dir = prepare_out_dir(g);
    save_checkpoint(dir / a->output, {result.model, cfg, result.trace},
                    full_echo("train", global_opts, *opts));
    std::cout << "wrote " << (dir / a->output).string() << "\n";
    return static_cast<int>(kOk);
  };
  return {app, run};
}

}  // namespace osrcnn::cli
