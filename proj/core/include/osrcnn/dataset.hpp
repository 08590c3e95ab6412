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

// In-memory index over a COCO-style annotation file.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "osrcnn/geometry.hpp"

namespace osrcnn {

struct ImageInfo {
  std::int64_t id = 0;
  int width = 0;
  int height = 0;
  std::string file_name;

  friend bool operator==(const ImageInfo&, const ImageInfo&) = default;
};

struct Category {
  std::int64_t id = 0;
  std::string name;

  friend bool operator==(const Category&, const Category&) = default;
};

struct Annotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;  // -1 marks a relabelled unknown object
  std::array<double, 4> bbox{};  // x, y, w, h as stored on disk
  bool difficult = false;

  Box box() const noexcept { return Box::from_xywh(bbox[0], bbox[1], bbox[2], bbox[3]); }

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct DatasetIndex {
  std::vector<ImageInfo> images;
  std::vector<Annotation> annotations;
  std::vector<Category> categories;

  /// Annotation positions grouped by image id (rebuilt by reindex()).
  std::map<std::int64_t, std::vector<std::size_t>> annotations_by_image;

  /// Checks unique ids and that every annotation references an existing
  /// image and category (or -1), then rebuilds the lookup tables. Throws
  /// SchemaError naming the offending entry.
  void reindex();

  const Category* find_category(std::int64_t id) const;
  bool has_image(std::int64_t id) const;

  friend bool operator==(const DatasetIndex& a, const DatasetIndex& b) {
    return a.images == b.images && a.annotations == b.annotations && a.categories == b.categories;
  }
};

/// Parses COCO JSON text: images[{id,width,height,file_name}],
/// annotations[{id,image_id,category_id,bbox:[x,y,w,h]}] with an optional
/// boolean "difficult", categories[{id,name}]. `source` names the input in
/// diagnostics.
DatasetIndex parse_annotations(std::string_view text, const std::string& source = "<memory>");
DatasetIndex load_annotations(const std::filesystem::path& path);

/// Deterministic serialization; parse_annotations(dump_annotations(ds)) == ds.
std::string dump_annotations(const DatasetIndex& ds);
void save_annotations(const DatasetIndex& ds, const std::filesystem::path& path);

}  // namespace osrcnn
