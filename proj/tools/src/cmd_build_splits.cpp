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
#include "osrcnn/splits.hpp"

namespace osrcnn::cli {

namespace {

struct SplitArgs {
  std::string annotations;
  std::vector<std::int64_t> known;
  std::size_t known_count = 0;
  std::vector<std::size_t> t1;
  std::vector<double> t2;
  double train_fraction = 0.5;
};

}  // namespace

Command add_build_splits(CLI::App& root, const Globals& g, const OptionSet& global_opts) {
  auto* app = root.add_subcommand("build-splits", "Partition a dataset into known/unknown classes "
                                                  "and build open-set test settings");
  auto a = std::make_shared<SplitArgs>();
  auto opts = std::make_shared<OptionSet>(app);
  opts->add("annotations", a->annotations, "COCO-style annotation file")->required();
  opts->add("known", a->known, "Known category ids, in label order")->delimiter(',');
  opts->add("known-count", a->known_count, "Use the first N categories by id as known");
  opts->add("t1", a->t1, "Class sweep: numbers of unknown classes")->delimiter(',');
  opts->add("t2", a->t2, "Wilderness sweep: open/close image ratios")->delimiter(',');
  opts->add("train-fraction", a->train_fraction, "Share of unknown-free images used for training")
      ->check(CLI::Range(0.0, 1.0));

  auto run = [&g, &global_opts, a, opts]() {
    const auto ds = load_annotations(a->annotations);
    SplitOptions so;
    so.known_categories = a->known;
    if (so.known_categories.empty()) {
      if (a->known_count == 0) throw std::invalid_argument("give --known or --known-count");
      std::vector<std::int64_t> ids;
      for (const auto& c : ds.categories) ids.push_back(c.id);
      std::sort(ids.begin(), ids.end());
      if (a->known_count > ids.size()) {
        throw std::invalid_argument("--known-count exceeds the " + std::to_string(ids.size()) +
                                    " categories in the dataset");
      }
      so.known_categories.assign(ids.begin(), ids.begin() + static_cast<long>(a->known_count));
    } else if (a->known_count != 0) {
      throw std::invalid_argument("--known and --known-count are exclusive");
    }
    if (!a->t1.empty()) so.sweeps.push_back(ClassSweep{a->t1});
    if (!a->t2.empty()) so.sweeps.push_back(WildernessSweep{a->t2});
    so.train_fraction = a->train_fraction;
    so.seed = g.seed;

    const auto split = build_splits(ds, so);
    const auto dir = prepare_out_dir(g);
    const auto echo = full_echo("build-splits", global_opts, *opts);
    write_text(dir / "manifest.json",
               manifest_json(split, ds, a->annotations, fnv1a64_file(a->annotations), echo));
    save_annotations(relabel(ds, split, split.train_images), dir / "train.json");
    save_annotations(relabel(ds, split, split.closeset_images), dir / "closeset.json");
    for (const auto& s : split.settings) {
      const auto images = s.all_images();
      save_annotations(relabel(ds, split, images), dir / (s.name + ".json"));
    }

    std::cout << "known " << split.known_categories.size() << ", unknown "
              << split.unknown_categories.size() << ", train " << split.train_images.size()
              << " images, close-set " << split.closeset_images.size() << " images\n";
    for (const auto& s : split.settings) {
      char line[160];
      std::snprintf(line, sizeof(line), "%-16s close %6zu  open %6zu  WR %.4f\n", s.name.c_str(),
                    s.closeset_images.size(), s.openset_images.size(), wilderness_ratio(s));
      std::cout << line;
    }
    return static_cast<int>(kOk);
  };
  return {app, run};
}

}  // namespace osrcnn::cli
