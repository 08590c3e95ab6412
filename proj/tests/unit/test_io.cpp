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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "metric_oracles.hpp"
#include "osrcnn/errors.hpp"
#include "osrcnn/io.hpp"
#include "split_fixtures.hpp"

using namespace osrcnn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("checkpoint round trip") {
  TempDir tmp("osrcnn_test_ckpt");
  Checkpoint ck;
  ck.model = PrototypeModel::initialize(ModelDims{5, 4, 6, 3}, 80);
  ck.model.unknown_threshold = 0.21;
  ck.model.margins = {0.1, 0.9};
  ck.config.learning_rate = 0.02;
  ck.config.steps = 17;
  ck.config.seed = 1234567890123ULL;
  ck.config.weights = LossWeights::voc_coco();
  ck.trace = {{0, 1.5, 2.5, 4.0}, {17, 0.5, 0.25, 1.0}};
  const fs::path file = tmp.path / "model.json";
  save_checkpoint(file, ck, {{"command", "train"}});

  const auto back = load_checkpoint(file);
  CHECK(back.model.encoder_weight == ck.model.encoder_weight);
  CHECK(back.model.encoder_bias == ck.model.encoder_bias);
  CHECK(back.model.prototypes == ck.model.prototypes);
  CHECK(back.model.remap_weight == ck.model.remap_weight);
  CHECK(back.model.classifier_weight == ck.model.classifier_weight);
  CHECK(back.model.classifier_bias == ck.model.classifier_bias);
  CHECK(back.model.unknown_threshold == 0.21);
  CHECK(back.model.margins.negative == 0.9);
  CHECK(back.config.steps == 17);
  CHECK(back.config.seed == 1234567890123ULL);
  CHECK(back.config.weights.lambda == ck.config.weights.lambda);
  REQUIRE(back.trace.size() == 2);
  CHECK(back.trace[1].total == 1.0);

  save_checkpoint(tmp.path / "again.json", back, {{"command", "train"}});
  CHECK(slurp(tmp.path / "again.json") == slurp(file));
}

TEST_CASE("checkpoint validation") {
  TempDir tmp("osrcnn_test_ckpt_bad");
  Checkpoint ck;
  ck.model = PrototypeModel::initialize(ModelDims{3, 2, 2, 2}, 81);
  const fs::path file = tmp.path / "model.json";
  save_checkpoint(file, ck, {});
  auto root = nlohmann::json::parse(slurp(file));

  auto write_variant = [&](const nlohmann::json& j) {
    std::ofstream(tmp.path / "variant.json") << j.dump();
    return tmp.path / "variant.json";
  };
  auto v = root;
  v["version"] = 99;
  CHECK_THROWS_AS(load_checkpoint(write_variant(v)), SchemaError);
  v = root;
  v["format"] = "something-else";
  CHECK_THROWS_AS(load_checkpoint(write_variant(v)), SchemaError);
  v = root;
  v["dims"]["feature_dim"] = 4;
  CHECK_THROWS_AS(load_checkpoint(write_variant(v)), DimensionError);
  v = root;
  v.erase("prototypes");
  CHECK_THROWS_AS(load_checkpoint(write_variant(v)), SchemaError);
  CHECK_THROWS_AS(load_checkpoint(tmp.path / "missing.json"), SchemaError);
}

TEST_CASE("proposal file round trip") {
  TempDir tmp("osrcnn_test_props");
  SyntheticConfig cfg;
  cfg.feature_dim = 8;
  cfg.known_classes = 3;
  cfg.unknown_classes = 1;
  cfg.samples_per_class = 8;
  cfg.closeset_images = 3;
  cfg.openset_images = 3;
  const auto ds = generate_synthetic(cfg);
  write_proposal_file(tmp.path / "test.jsonl", ds.test);
  const auto back = read_proposal_file(tmp.path / "test.jsonl");
  REQUIRE(back.size() == ds.test.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].image_id == ds.test[i].image_id);
    REQUIRE(back[i].proposals.size() == ds.test[i].proposals.size());
    for (std::size_t p = 0; p < back[i].proposals.size(); ++p) {
      CHECK(back[i].proposals[p].initial_box == ds.test[i].proposals[p].initial_box);
      CHECK(back[i].proposals[p].refined_box == ds.test[i].proposals[p].refined_box);
      CHECK(back[i].proposals[p].centerness == ds.test[i].proposals[p].centerness);
      CHECK(back[i].proposals[p].feature == ds.test[i].proposals[p].feature);
    }
    CHECK(back[i].gt.size() == ds.test[i].gt.size());
  }
  write_proposal_file(tmp.path / "again.jsonl", back);
  CHECK(slurp(tmp.path / "again.jsonl") == slurp(tmp.path / "test.jsonl"));

  std::ofstream(tmp.path / "mixed.jsonl")
      << R"({"image_id": 1, "proposals": [{"box_init": [0,0,1,1], "centerness": 0.5, "box_refined": [0,0,1,1], "iou_score": 0.5, "feature": [1, 2]}], "gt": []})"
      << "\n"
      << R"({"image_id": 2, "proposals": [{"box_init": [0,0,1,1], "centerness": 0.5, "box_refined": [0,0,1,1], "iou_score": 0.5, "feature": [1, 2, 3]}], "gt": []})"
      << "\n";
  CHECK_THROWS_AS(read_proposal_file(tmp.path / "mixed.jsonl"), DimensionError);
  std::ofstream(tmp.path / "broken.jsonl") << "{\"image_id\": 1}\n";
  CHECK_THROWS_AS(read_proposal_file(tmp.path / "broken.jsonl"), SchemaError);
}

TEST_CASE("detections round trip") {
  TempDir tmp("osrcnn_test_dets");
  std::vector<ImageDetections> dets{{4, {{{1, 2, 3, 4}, 0, 0.75, 0.6, 0.05}, {{5, 6, 7, 8}, kUnknownClass, 0.5, 0.0, 0.4}}},
                                    {9, {}}};
  write_detections(tmp.path / "d.json", dets, {{"t_u", "0.17"}});
  const auto back = read_detections(tmp.path / "d.json");
  REQUIRE(back.size() == 2);
  CHECK(back[0].image_id == 4);
  CHECK(back[0].box == Box{1, 2, 3, 4});
  CHECK(back[0].score == 0.75);
  CHECK(back[1].label == kUnknownClass);
  const auto root = nlohmann::json::parse(slurp(tmp.path / "d.json"));
  CHECK(root["format"] == "osrcnn-detections");
  CHECK(root["config"]["t_u"] == "0.17");
}

TEST_CASE("report outputs") {
  const auto f = oracle::load_eval_fixture(std::string(OSRCNN_FIXTURE_DIR) + "/eval3");
  EvalOptions opts;
  opts.num_classes = 2;
  opts.class_names = {"mug", "bowl"};
  const auto rep = evaluate(f.dets, f.gts, opts);
  const auto j = nlohmann::json::parse(report_json(rep, {{"method", "voc2012"}}));
  CHECK(j["aose"] == 1);
  CHECK(j["wi"]["value"].get<double>() == doctest::Approx(25.0));
  CHECK(j["config"]["method"] == "voc2012");
  CHECK(report_json(rep, {}) == report_json(evaluate(f.dets, f.gts, opts), {}));

  const auto table = report_table(rep);
  CHECK(table.find("mug") != std::string::npos);
  CHECK(table.find("AOSE") != std::string::npos);

  const auto csv = pr_curves_csv(rep);
  CHECK(csv.rfind("class,label,recall,precision\n", 0) == 0);
  CHECK(csv.find("unknown,-1,") != std::string::npos);
}

TEST_CASE("split manifest and hashing") {
  TempDir tmp("osrcnn_test_manifest");
  write_text(tmp.path / "empty.txt", "");
  write_text(tmp.path / "a.txt", "a");
  CHECK(fnv1a64_file(tmp.path / "empty.txt") == "cbf29ce484222325");
  CHECK(fnv1a64_file(tmp.path / "a.txt") == "af63dc4c8601ec8c");

  const auto ds = fixture::annotated_dataset(80, 6, 4, 0.4, 82);
  SplitOptions opts;
  opts.known_categories = {1, 2, 3, 4};
  opts.sweeps = {WildernessSweep{{1.0}}};
  const auto split = build_splits(ds, opts);
  const auto j = nlohmann::json::parse(manifest_json(split, ds, "ann.json", "00ff", {{"seed", "0"}}));
  CHECK(j["format"] == "osrcnn-split-manifest");
  CHECK(j["source"]["fnv1a64"] == "00ff");
  CHECK(j["settings"][0]["wilderness_ratio"].get<double>() == 1.0);
  CHECK(j["train_images"].size() == split.train_images.size());
}
