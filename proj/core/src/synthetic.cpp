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
#include "osrcnn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "osrcnn/labels.hpp"
#include "osrcnn/rng.hpp"

namespace osrcnn {
namespace {

constexpr int kMeanPlacementAttempts = 2000;

std::vector<Eigen::VectorXd> place_means(const SyntheticConfig& cfg, Rng& rng) {
  std::vector<Eigen::VectorXd> means;
  const int total = cfg.known_classes + cfg.unknown_classes;
  for (int c = 0; c < total; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kMeanPlacementAttempts && !placed; ++attempt) {
      Eigen::VectorXd v(cfg.feature_dim);
      for (int d = 0; d < cfg.feature_dim; ++d) v(d) = rng.normal();
      if (v.norm() == 0.0) continue;
      v.normalize();
      placed = std::all_of(means.begin(), means.end(), [&](const Eigen::VectorXd& m) {
        return m.dot(v) <= cfg.max_mean_cosine;
      });
      if (placed) means.push_back(std::move(v));
    }
    if (!placed) {
      throw std::invalid_argument("generate_synthetic: cannot place " + std::to_string(total) +
                                  " cluster means in " + std::to_string(cfg.feature_dim) +
                                  " dimensions with pairwise cosine <= " +
                                  std::to_string(cfg.max_mean_cosine));
    }
  }
  return means;
}

Eigen::VectorXd sample_feature(const Eigen::VectorXd& mean, double spread, Rng& rng) {
  Eigen::VectorXd f(mean.size());
  for (Eigen::Index d = 0; d < mean.size(); ++d) f(d) = mean(d) + spread * rng.normal();
  return f;
}

Box clip(Box b, const SyntheticConfig& cfg) {
  b.x1 = std::clamp(b.x1, 0.0, static_cast<double>(cfg.image_width));
  b.x2 = std::clamp(b.x2, 0.0, static_cast<double>(cfg.image_width));
  b.y1 = std::clamp(b.y1, 0.0, static_cast<double>(cfg.image_height));
  b.y2 = std::clamp(b.y2, 0.0, static_cast<double>(cfg.image_height));
  if (b.x2 < b.x1) std::swap(b.x1, b.x2);
  if (b.y2 < b.y1) std::swap(b.y1, b.y2);
  return b;
}

Box jitter(const Box& gt, double noise, const SyntheticConfig& cfg, Rng& rng) {
  if (noise == 0.0) return gt;
  const double w = gt.width();
  const double h = gt.height();
  return clip({gt.x1 + noise * w * rng.normal(), gt.y1 + noise * h * rng.normal(),
               gt.x2 + noise * w * rng.normal(), gt.y2 + noise * h * rng.normal()},
              cfg);
}

Box random_box(const SyntheticConfig& cfg, Rng& rng) {
  const double w = rng.uniform(40.0, std::min(160.0, 0.5 * cfg.image_width));
  const double h = rng.uniform(40.0, std::min(160.0, 0.5 * cfg.image_height));
  const double x = rng.uniform(0.0, cfg.image_width - w);
  const double y = rng.uniform(0.0, cfg.image_height - h);
  return {x, y, x + w, y + h};
}

// Centerness of the object center seen from the initial box.
double localization_centerness(const Box& initial, const Box& gt) {
  const Location c{gt.center_x(), gt.center_y()};
  if (!initial.is_valid() || c.x < initial.x1 || c.x > initial.x2 || c.y < initial.y1 ||
      c.y > initial.y2) {
    return 0.0;
  }
  return centerness(encode_ltrb(c, initial));
}

struct ObjectSpec {
  Box box;
  int label;    // label index, or kUnknownClass
  int cluster;  // index into the cluster means
};

ImageProposals make_image(std::int64_t id, const std::vector<ObjectSpec>& objects,
                          const std::vector<Eigen::VectorXd>& means, const SyntheticConfig& cfg,
                          Rng& rng) {
  ImageProposals img;
  img.image_id = id;
  for (const auto& obj : objects) {
    img.gt.push_back({obj.box, obj.label});
    for (int p = 0; p < cfg.proposals_per_object; ++p) {
      ProposalRecord rec;
      rec.initial_box = jitter(obj.box, 2.0 * cfg.box_noise, cfg, rng);
      rec.refined_box = jitter(obj.box, cfg.box_noise, cfg, rng);
      rec.centerness = localization_centerness(rec.initial_box, obj.box);
      rec.iou_score = iou(rec.refined_box, obj.box);
      rec.feature = sample_feature(means[obj.cluster], cfg.spread, rng);
      img.proposals.push_back(std::move(rec));
    }
  }
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(cfg.feature_dim);
  for (int p = 0; p < cfg.background_proposals; ++p) {
    ProposalRecord rec;
    rec.initial_box = random_box(cfg, rng);
    rec.refined_box = jitter(rec.initial_box, cfg.box_noise, cfg, rng);
    rec.centerness = rng.uniform(0.0, 0.2);
    rec.iou_score = rng.uniform(0.0, 0.2);
    // Background clutter: no class structure, roughly unit norm.
    rec.feature = sample_feature(origin, 1.0 / std::sqrt(cfg.feature_dim), rng);
    img.proposals.push_back(std::move(rec));
  }
  return img;
}

std::vector<ObjectSpec> place_objects(const std::vector<std::pair<int, int>>& label_cluster,
                                      const SyntheticConfig& cfg, Rng& rng) {
  std::vector<ObjectSpec> objs;
  for (const auto& [label, cluster] : label_cluster) {
    // Rejection-sample until the box barely overlaps earlier objects.
    Box b;
    for (int attempt = 0; attempt < 100; ++attempt) {
      b = random_box(cfg, rng);
      const bool clear = std::all_of(objs.begin(), objs.end(),
                                     [&](const ObjectSpec& o) { return iou(o.box, b) < 0.05; });
      if (clear) break;
    }
    objs.push_back({b, label, cluster});
  }
  return objs;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (feature_dim < 1 || known_classes < 1 || unknown_classes < 0 || samples_per_class < 1 ||
      objects_per_image < 1 || proposals_per_object < 1 || background_proposals < 0 ||
      closeset_images < 0 || openset_images < 0) {
    throw std::invalid_argument("synthetic config: counts must be positive");
  }
  if (!(spread > 0.0)) throw std::invalid_argument("synthetic config: spread must be positive");
  if (!(box_noise >= 0.0)) throw std::invalid_argument("synthetic config: box noise must be >= 0");
  if (openset_images > 0 && unknown_classes == 0) {
    throw std::invalid_argument("synthetic config: open-set images need unknown classes");
  }
  if (image_width < 200 || image_height < 200) {
    throw std::invalid_argument("synthetic config: images must be at least 200x200");
  }
}

SyntheticDataset generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  SyntheticDataset out;
  Rng mean_rng(mix_seed(cfg.seed, 0));
  out.cluster_means = place_means(cfg, mean_rng);

  // Training images: known objects only, classes assigned round robin.
  const int per_image = cfg.objects_per_image * cfg.proposals_per_object;
  const int train_images =
      (cfg.known_classes * cfg.samples_per_class + per_image - 1) / per_image;
  Rng train_rng(mix_seed(cfg.seed, 1));
  int next_class = 0;
  for (int i = 0; i < train_images; ++i) {
    std::vector<std::pair<int, int>> lc;
    for (int k = 0; k < cfg.objects_per_image; ++k) {
      lc.emplace_back(next_class, next_class);
      next_class = (next_class + 1) % cfg.known_classes;
    }
    out.train.push_back(make_image(i + 1, place_objects(lc, cfg, train_rng), out.cluster_means,
                                   cfg, train_rng));
  }

  // Test images: close-set first, then open-set with at least one unknown.
  Rng test_rng(mix_seed(cfg.seed, 2));
  const std::int64_t first_test_id = 100000;
  auto& ann = out.test_annotations;
  for (int c = 0; c < cfg.known_classes; ++c) {
    ann.categories.push_back({c, "class_" + std::to_string(c)});
  }
  std::int64_t next_ann = 1;
  for (int i = 0; i < cfg.closeset_images + cfg.openset_images; ++i) {
    const bool open = i >= cfg.closeset_images;
    std::vector<std::pair<int, int>> lc;
    for (int k = 0; k < cfg.objects_per_image; ++k) {
      const bool unknown = open && (k == 0 || test_rng.uniform() < 0.5);
      if (unknown) {
        const int u = static_cast<int>(test_rng.below(cfg.unknown_classes));
        lc.emplace_back(kUnknownClass, cfg.known_classes + u);
      } else {
        const int c = static_cast<int>(test_rng.below(cfg.known_classes));
        lc.emplace_back(c, c);
      }
    }
    const std::int64_t id = first_test_id + i;
    auto img = make_image(id, place_objects(lc, cfg, test_rng), out.cluster_means, cfg, test_rng);
    ann.images.push_back({id, cfg.image_width, cfg.image_height,
                          "synthetic_" + std::to_string(id) + ".png"});
    for (const auto& g : img.gt) {
      const auto xywh = g.box.to_xywh();
      ann.annotations.push_back({next_ann++, id, g.category_id, {xywh[0], xywh[1], xywh[2], xywh[3]}});
    }
    if (!open) out.closeset_images.push_back(id);
    out.test.push_back(std::move(img));
  }
  ann.reindex();
  return out;
}

}  // namespace osrcnn
