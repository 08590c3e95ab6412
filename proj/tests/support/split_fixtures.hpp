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

// Generated COCO-style datasets for split construction tests.

#include <cstdint>
#include <string>

#include "osrcnn/dataset.hpp"
#include "osrcnn/rng.hpp"

namespace osrcnn::fixture {

/// `images` images over categories 1..`classes`. A `closed_fraction` share
/// of the images uses only categories 1..`known`; the rest hold at least one
/// object from the remaining categories.
inline DatasetIndex annotated_dataset(int images, int classes, int known, double closed_fraction,
                                      std::uint64_t seed) {
  Rng rng(seed);
  DatasetIndex ds;
  for (int c = 1; c <= classes; ++c) ds.categories.push_back({c, "cat" + std::to_string(c)});
  std::int64_t ann_id = 1;
  for (int i = 1; i <= images; ++i) {
    ds.images.push_back({i, 640, 480, "img" + std::to_string(i) + ".jpg"});
    const bool closed = rng.uniform() < closed_fraction;
    const int objects = 1 + static_cast<int>(rng.below(3));
    for (int k = 0; k < objects; ++k) {
      std::int64_t cat = 1 + static_cast<std::int64_t>(rng.below(known));
      if (!closed && (k == 0 || rng.uniform() < 0.3)) {
        cat = known + 1 + static_cast<std::int64_t>(rng.below(classes - known));
      }
      const double x = rng.uniform(0, 500), y = rng.uniform(0, 350);
      ds.annotations.push_back({ann_id++, i, cat, {x, y, rng.uniform(10, 100), rng.uniform(10, 100)}, false});
    }
  }
  ds.reindex();
  return ds;
}

}  // namespace osrcnn::fixture
