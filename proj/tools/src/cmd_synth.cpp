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
#include <iostream>

#include "json.hpp"
#include "options.hpp"
#include "osrcnn/synthetic.hpp"

namespace osrcnn::cli {

Command add_synth(CLI::App& root, const Globals& g, const OptionSet& global_opts) {
  auto* app = root.add_subcommand("synth", "Generate a separable synthetic feature benchmark");
  auto cfg = std::make_shared<SyntheticConfig>();
  auto opts = std::make_shared<OptionSet>(app);
  opts->add("feature-dim", cfg->feature_dim, "Feature dimension d_f")->check(CLI::PositiveNumber);
  opts->add("known", cfg->known_classes, "Known clusters")->check(CLI::PositiveNumber);
  opts->add("unknown", cfg->unknown_classes, "Unknown clusters (test only)")->check(CLI::NonNegativeNumber);
  opts->add("samples-per-class", cfg->samples_per_class, "Training proposals per known class")
      ->check(CLI::PositiveNumber);
  opts->add("spread", cfg->spread, "Per-dimension standard deviation of a cluster")
      ->check(CLI::PositiveNumber);
  opts->add("box-noise", cfg->box_noise, "Box jitter as a fraction of the box size")
      ->check(CLI::Range(0.0, 1.0));
  opts->add("closeset-images", cfg->closeset_images, "Test images with known objects only")
      ->check(CLI::NonNegativeNumber);
  opts->add("openset-images", cfg->openset_images, "Test images with an unknown object")
      ->check(CLI::NonNegativeNumber);
  opts->add("objects-per-image", cfg->objects_per_image, "Objects per image")->check(CLI::PositiveNumber);
  opts->add("proposals-per-object", cfg->proposals_per_object, "Proposals around each object")
      ->check(CLI::PositiveNumber);
  opts->add("background-proposals", cfg->background_proposals, "Clutter proposals per image")
      ->check(CLI::NonNegativeNumber);
  opts->add("max-mean-cosine", cfg->max_mean_cosine, "Largest cosine allowed between cluster means")
      ->check(CLI::Range(-1.0, 1.0));
  opts->add("image-width", cfg->image_width, "Image width")->check(CLI::PositiveNumber);
  opts->add("image-height", cfg->image_height, "Image height")->check(CLI::PositiveNumber);

  auto run = [&g, &global_opts, cfg, opts]() {
    cfg->seed = g.seed;
    const auto ds = generate_synthetic(*cfg);
    const auto dir = prepare_out_dir(g);
    const auto echo = full_echo("synth", global_opts, *opts);

    write_proposal_file(dir / "train.jsonl", ds.train);
    write_proposal_file(dir / "test.jsonl", ds.test);
    save_annotations(ds.test_annotations, dir / "test_annotations.json");
    nlohmann::ordered_json meta = {{"format", "osrcnn-synthetic"}, {"config", nlohmann::ordered_json::object()}};
    for (const auto& [k, v] : echo) meta["config"][k] = v;
    meta["known_classes"] = cfg->known_classes;
    meta["unknown_classes"] = cfg->unknown_classes;
    meta["train_images"] = ds.train.size();
    meta["closeset_images"] = ds.closeset_images;
    write_text(dir / "synth.json", meta.dump(1) + "\n");

    std::size_t train_props = 0, test_props = 0;
    for (const auto& im : ds.train) train_props += im.proposals.size();
    for (const auto& im : ds.test) test_props += im.proposals.size();
    std::cout << "train: " << ds.train.size() << " images, " << train_props << " proposals\n"
              << "test:  " << ds.test.size() << " images (" << ds.closeset_images.size()
              << " close-set), " << test_props << " proposals\n"
              << "wrote " << (dir / "train.jsonl").string() << ", " << (dir / "test.jsonl").string()
              << ", " << (dir / "test_annotations.json").string() << "\n";
    return static_cast<int>(kOk);
  };
  return {app, run};
}

}  // namespace osrcnn::cli
