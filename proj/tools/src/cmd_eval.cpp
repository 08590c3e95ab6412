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

#include "options.hpp"
#include "osrcnn/errors.hpp"

namespace osrcnn::cli {

namespace {

struct EvalArgs {
  std::string detections;
  std::string annotations;
  std::string method = "voc2012";
  EvalOptions opts;
};

}  // namespace

Command add_eval(CLI::App& root, const Globals& g, const OptionSet& global_opts) {
  auto* app = root.add_subcommand("eval", "Score detections with the open-set metric suite");
  auto a = std::make_shared<EvalArgs>();
  auto opts = std::make_shared<OptionSet>(app);
  opts->add("detections", a->detections, "Detections file written by infer")->required();
  opts->add("annotations", a->annotations,
            "Ground truth with categories 0..K-1 and -1 for unknown objects")
      ->required();
  opts->add("method", a->method, "AP method")->check(CLI::IsMember({"voc2012", "coco"}));
  opts->add("recall-level", a->opts.recall_level, "Close-set recall of the WI operating point")
      ->check(CLI::Range(0.0, 1.0));
  opts->add("iou-thresh", a->opts.iou_thresh, "Match IoU for WI, AOSE and unknown recall")
      ->check(CLI::Range(0.0, 1.0));
  opts->add("pr-samples", a->opts.pr_samples, "Recall samples per PR curve")->check(CLI::Range(2, 100000));

  auto run = [&g, &global_opts, a, opts]() {
    const auto ds = load_annotations(a->annotations);
    const int k = static_cast<int>(ds.categories.size());
    if (k == 0) throw SchemaError(a->annotations + ": no categories");
    a->opts.num_classes = k;
    a->opts.class_names.assign(k, "");
    for (const auto& cat : ds.categories) {
      if (cat.id < 0 || cat.id >= k) {
        throw SchemaError(a->annotations + ": category id " + std::to_string(cat.id) +
                          " is not a label index; evaluate the relabelled files from build-splits");
      }
      a->opts.class_names[cat.id] = cat.name;
    }
    a->opts.method = a->method == "coco" ? ApMethod::kCoco : ApMethod::kVoc2012;

    std::vector<EvalDetection> dets;
    for (const auto& d : read_detections(a->detections))
      if (ds.has_image(d.image_id)) dets.push_back(d);
    const auto report = evaluate(dets, ground_truth_from(ds), a->opts);

    const auto dir = prepare_out_dir(g);
    const auto echo = full_echo("eval", global_opts, *opts);
    write_text(dir / "report.json", report_json(report, echo));
    const auto table = report_table(report);
    write_text(dir / "report.txt", table);
    write_text(dir / "pr_curves.csv", pr_curves_csv(report));
    std::cout << table;

    if (!report.wi && report.max_closeset_recall < a->opts.recall_level) {
      std::cerr << "osrcnn: " << report.wi_error << "\n";
      return static_cast<int>(kUnreachableRecall);
    }
    return static_cast<int>(kOk);
  };
  return {app, run};
}

}  // namespace osrcnn::cli
