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
#pragma once

// On-disk formats. Everything is JSON text written with a fixed key order so
// identical inputs produce byte-identical files.
//
//   proposal-feature file   JSON lines, one image per line:
//     {"image_id", "proposals": [{"box_init": [x1,y1,x2,y2], "centerness",
//      "box_refined": [x1,y1,x2,y2], "iou_score", "feature": [...]}],
//      "gt": [{"box": [x1,y1,x2,y2], "category_id"}]}
//   detections file         {"format", "config", "detections": [{"image_id",
//                            "category_id" (-1 unknown), "box" [x1,y1,x2,y2],
//                            "objectness", "class_probability"}]}
//   checkpoint              {"format", "version", "dims", "margins", "t_u",
//                            weight arrays (row-major), "config", "trace"}
//   evaluation report       {"format", "config", metrics..., per-class table}
//   split manifest          {"format", "source", "label_map", image lists, ...}

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "osrcnn/metrics.hpp"
#include "osrcnn/pipeline.hpp"
#include "osrcnn/prototype.hpp"
#include "osrcnn/splits.hpp"
#include "osrcnn/synthetic.hpp"

namespace osrcnn {

inline constexpr int kCheckpointVersion = 1;

/// Effective configuration echoed into output artifacts, in insertion order.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

std::vector<ImageProposals> read_proposal_file(const std::filesystem::path& path);
void write_proposal_file(const std::filesystem::path& path,
                         const std::vector<ImageProposals>& images);

struct ImageDetections {
  std::int64_t image_id = 0;
  std::vector<Detection> detections;
};

void write_detections(const std::filesystem::path& path, const std::vector<ImageDetections>& dets,
                      const ConfigEcho& config);
std::vector<EvalDetection> read_detections(const std::filesystem::path& path);

struct Checkpoint {
  PrototypeModel model;
  TrainConfig config;
  std::vector<TracePoint> trace;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt,
                     const ConfigEcho& echo);
/// Throws SchemaError for a missing/unsupported header and DimensionError
/// when the stored arrays disagree with the stored dimensions.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Ground truth of an annotation file (labels must already be 0..K-1 / -1).
std::vector<GroundTruth> ground_truth_from(const DatasetIndex& ds);

std::string report_json(const EvalReport& report, const ConfigEcho& config);
/// Aligned-column summary for terminals.
std::string report_table(const EvalReport& report);
/// One row per (class, recall) sample: class,label,recall,precision.
std::string pr_curves_csv(const EvalReport& report);

std::string manifest_json(const SplitSpec& split, const DatasetIndex& ds,
                          const std::string& source_path, const std::string& source_hash,
                          const ConfigEcho& config);

/// FNV-1a 64-bit digest of a file, as 16 lowercase hex digits.
std::string fnv1a64_file(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace osrcnn
