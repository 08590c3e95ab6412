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
#include "osrcnn/splits.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "osrcnn/errors.hpp"
#include "osrcnn/labels.hpp"
#include "osrcnn/rng.hpp"

namespace osrcnn {
namespace {

std::string format_ratio(double r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

}  // namespace

std::vector<std::int64_t> TestSetting::all_images() const {
  std::vector<std::int64_t> out = closeset_images;
  out.insert(out.end(), openset_images.begin(), openset_images.end());
  std::sort(out.begin(), out.end());
  return out;
}

double wilderness_ratio(const TestSetting& setting) {
  if (setting.closeset_images.empty()) {
    throw std::invalid_argument("wilderness_ratio: setting \"" + setting.name +
                                "\" has no close-set images");
  }
  return static_cast<double>(setting.openset_images.size()) /
         static_cast<double>(setting.closeset_images.size());
}

SplitSpec build_splits(const DatasetIndex& ds, const SplitOptions& opts) {
  if (opts.known_categories.empty()) throw std::invalid_argument("build_splits: no known classes");
  if (!(opts.train_fraction >= 0.0 && opts.train_fraction < 1.0)) {
    throw std::invalid_argument("build_splits: train fraction must lie in [0, 1)");
  }

  SplitSpec split;
  std::set<std::int64_t> known;
  for (std::int64_t id : opts.known_categories) {
    if (!ds.find_category(id)) {
      throw std::invalid_argument("build_splits: known class " + std::to_string(id) +
                                  " is not in the dataset");
    }
    if (!known.insert(id).second) {
      throw std::invalid_argument("build_splits: known class " + std::to_string(id) +
                                  " listed twice");
    }
    split.label_map[id] = static_cast<int>(split.known_categories.size());
    split.known_categories.push_back(id);
  }
  std::vector<std::int64_t> all_categories;
  for (const auto& c : ds.categories) all_categories.push_back(c.id);
  std::sort(all_categories.begin(), all_categories.end());
  for (std::int64_t id : all_categories) {
    if (!known.count(id)) {
      split.unknown_categories.push_back(id);
      split.label_map[id] = kUnknownClass;
    }
  }

  // Partition images by whether they contain unknown objects.
  std::vector<std::int64_t> closed_pool;
  std::vector<std::int64_t> open_pool;
  std::map<std::int64_t, std::set<std::int64_t>> unknown_classes_of;
  std::vector<std::int64_t> image_ids;
  for (const auto& im : ds.images) image_ids.push_back(im.id);
  std::sort(image_ids.begin(), image_ids.end());
  for (std::int64_t id : image_ids) {
    std::set<std::int64_t> unk;
    if (auto it = ds.annotations_by_image.find(id); it != ds.annotations_by_image.end()) {
      for (std::size_t a : it->second) {
        const auto cat = ds.annotations[a].category_id;
        if (!known.count(cat)) unk.insert(cat);
      }
    }
    if (unk.empty()) {
      closed_pool.push_back(id);
    } else {
      open_pool.push_back(id);
      unknown_classes_of[id] = std::move(unk);
    }
  }

  Rng rng(mix_seed(opts.seed, 0));
  const auto perm = rng.permutation(closed_pool.size());
  const auto n_train = static_cast<std::size_t>(
      std::llround(opts.train_fraction * static_cast<double>(closed_pool.size())));
  for (std::size_t k = 0; k < perm.size(); ++k) {
    (k < n_train ? split.train_images : split.closeset_images).push_back(closed_pool[perm[k]]);
  }
  std::sort(split.train_images.begin(), split.train_images.end());
  std::sort(split.closeset_images.begin(), split.closeset_images.end());

  // One permutation shared by every wilderness setting, so larger ratios
  // extend smaller ones.
  Rng open_rng(mix_seed(opts.seed, 1));
  const auto open_perm = open_rng.permutation(open_pool.size());

  for (const auto& sweep : opts.sweeps) {
    if (const auto* cs = std::get_if<ClassSweep>(&sweep)) {
      for (std::size_t n : cs->unknown_counts) {
        if (n == 0 || n > split.unknown_categories.size()) {
          throw InfeasibleSplitError("class sweep: " + std::to_string(n) +
                                     " unknown classes requested, " +
                                     std::to_string(split.unknown_categories.size()) +
                                     " available");
        }
        const std::set<std::int64_t> allowed(split.unknown_categories.begin(),
                                             split.unknown_categories.begin() + n);
        TestSetting s;
        s.name = "T1-unknown" + std::to_string(n);
        s.kind = SettingKind::kClassSweep;
        s.unknown_classes = n;
        s.closeset_images = split.closeset_images;
        for (std::int64_t id : open_pool) {
          const auto& unk = unknown_classes_of[id];
          if (std::includes(allowed.begin(), allowed.end(), unk.begin(), unk.end())) {
            s.openset_images.push_back(id);
          }
        }
        split.settings.push_back(std::move(s));
      }
    } else {
      for (double ratio : std::get<WildernessSweep>(sweep).ratios) {
        if (!(ratio >= 0.0) || !std::isfinite(ratio)) {
          throw std::invalid_argument("wilderness sweep: ratio must be a nonnegative number");
        }
        if (split.closeset_images.empty()) {
          throw InfeasibleSplitError("wilderness sweep: no close-set test images available");
        }
        const auto need = static_cast<std::size_t>(
            std::llround(ratio * static_cast<double>(split.closeset_images.size())));
        if (need > open_pool.size()) {
          throw InfeasibleSplitError("wilderness ratio " + format_ratio(ratio) + " needs " +
                                     std::to_string(need) + " open-set images, only " +
                                     std::to_string(open_pool.size()) + " available");
        }
        TestSetting s;
        s.name = "T2-wr" + format_ratio(ratio);
        s.kind = SettingKind::kWildernessSweep;
        s.target_ratio = ratio;
        s.closeset_images = split.closeset_images;
        for (std::size_t k = 0; k < need; ++k) s.openset_images.push_back(open_pool[open_perm[k]]);
        std::sort(s.openset_images.begin(), s.openset_images.end());
        split.settings.push_back(std::move(s));
      }
    }
  }
  return split;
}

DatasetIndex relabel(const DatasetIndex& ds, const SplitSpec& split,
                     std::span<const std::int64_t> image_ids) {
  const std::set<std::int64_t> wanted(image_ids.begin(), image_ids.end());
  DatasetIndex out;
  for (const auto& im : ds.images)
    if (wanted.count(im.id)) out.images.push_back(im);
  for (std::size_t k = 0; k < split.known_categories.size(); ++k) {
    const Category* c = ds.find_category(split.known_categories[k]);
    out.categories.push_back({static_cast<std::int64_t>(k), c ? c->name : ""});
  }
  for (const auto& a : ds.annotations) {
    if (!wanted.count(a.image_id)) continue;
    Annotation r = a;
    const auto it = split.label_map.find(a.category_id);
    r.category_id = it == split.label_map.end() ? kUnknownClass : it->second;
    out.annotations.push_back(r);
  }
  out.reindex();
  return out;
}

}  // namespace osrcnn
