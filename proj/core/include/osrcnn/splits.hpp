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

// Open-set benchmark construction: known/unknown class partition, a seeded
// train / close-set test split, and two families of open-set test settings:
//   class sweep (T1)       close-set test images plus every image whose
//                          unknown objects come from the first n unknown classes;
//   wilderness sweep (T2)  close-set test images plus open-set images sampled
//                          until open/close image count equals the target ratio.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "osrcnn/dataset.hpp"

namespace osrcnn {

struct ClassSweep {
  std::vector<std::size_t> unknown_counts;
};

struct WildernessSweep {
  std::vector<double> ratios;
};

using SweepSetting = std::variant<ClassSweep, WildernessSweep>;

struct SplitOptions {
  std::vector<std::int64_t> known_categories;  // order defines label indices
  std::vector<SweepSetting> sweeps;
  double train_fraction = 0.5;  // of the images free of unknown objects
  std::uint64_t seed = 0;
};

enum class SettingKind { kClassSweep, kWildernessSweep };

struct TestSetting {
  std::string name;
  SettingKind kind = SettingKind::kClassSweep;
  std::size_t unknown_classes = 0;  // class sweep only
  double target_ratio = 0.0;        // wilderness sweep only
  std::vector<std::int64_t> closeset_images;
  std::vector<std::int64_t> openset_images;

  std::vector<std::int64_t> all_images() const;
};

struct SplitSpec {
  std::vector<std::int64_t> known_categories;
  std::vector<std::int64_t> unknown_categories;
  std::map<std::int64_t, int> label_map;  // category id -> label index or -1
  std::vector<std::int64_t> train_images;
  std::vector<std::int64_t> closeset_images;  // close-set test pool
  std::vector<TestSetting> settings;
};

/// Throws std::invalid_argument for unknown/duplicate known classes or bad
/// options and InfeasibleSplitError when a setting cannot be filled.
SplitSpec build_splits(const DatasetIndex& ds, const SplitOptions& opts);

/// Open-set image count over close-set image count. Throws
/// std::invalid_argument when there are no close-set images.
double wilderness_ratio(const TestSetting& setting);

/// Annotations of `image_ids` with categories mapped through the split's
/// label map: known categories become 0..K-1 (the category table lists them
/// under those ids), unknown ones become -1.
DatasetIndex relabel(const DatasetIndex& ds, const SplitSpec& split,
                     std::span<const std::int64_t> image_ids);

}  // namespace osrcnn
