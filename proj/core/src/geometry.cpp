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
#include "osrcnn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace osrcnn {

bool Box::is_valid() const noexcept {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
         x1 <= x2 && y1 <= y2;
}

bool Box::has_area() const noexcept { return is_valid() && x2 > x1 && y2 > y1; }

double iou(const Box& a, const Box& b) noexcept {
  if (!a.has_area() || !b.has_area()) return 0.0;
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Box decode_ltrb(const Location& loc, const LtrbOffsets& o) {
  if (o.l < 0.0 || o.t < 0.0 || o.r < 0.0 || o.b < 0.0) {
    throw std::invalid_argument("decode_ltrb: offsets must be nonnegative");
  }
  return {loc.x - o.l, loc.y - o.t, loc.x + o.r, loc.y + o.b};
}

LtrbOffsets encode_ltrb(const Location& loc, const Box& box) {
  if (!box.is_valid()) throw std::invalid_argument("encode_ltrb: invalid box");
  if (loc.x < box.x1 || loc.x > box.x2 || loc.y < box.y1 || loc.y > box.y2) {
    throw std::invalid_argument("encode_ltrb: location (" + std::to_string(loc.x) + ", " +
                                std::to_string(loc.y) + ") lies outside the box");
  }
  return {loc.x - box.x1, loc.y - box.y1, box.x2 - loc.x, box.y2 - loc.y};
}

double centerness(const LtrbOffsets& o) {
  if (o.l < 0.0 || o.t < 0.0 || o.r < 0.0 || o.b < 0.0) {
    throw std::invalid_argument("centerness: offsets must be nonnegative");
  }
  const double lr_max = std::max(o.l, o.r);
  const double tb_max = std::max(o.t, o.b);
  if (lr_max == 0.0 || tb_max == 0.0) return 0.0;
  const double ratio = (std::min(o.l, o.r) / lr_max) * (std::min(o.t, o.b) / tb_max);
  return std::sqrt(ratio);
}

Box apply_delta(const Box& base, const DeltaXYWH& d) {
  if (!base.has_area()) throw std::invalid_argument("apply_delta: base box has zero area");
  const double w = base.width();
  const double h = base.height();
  const double cx = base.center_x() + d.dx * w;
  const double cy = base.center_y() + d.dy * h;
  const double nw = w * std::exp(d.dw);
  const double nh = h * std::exp(d.dh);
  return {cx - 0.5 * nw, cy - 0.5 * nh, cx + 0.5 * nw, cy + 0.5 * nh};
}

DeltaXYWH encode_delta(const Box& base, const Box& target) {
  if (!base.has_area()) throw std::invalid_argument("encode_delta: base box has zero area");
  if (!target.has_area()) throw std::invalid_argument("encode_delta: target box has zero area");
  const double w = base.width();
  const double h = base.height();
  return {(target.center_x() - base.center_x()) / w, (target.center_y() - base.center_y()) / h,
          std::log(target.width() / w), std::log(target.height() / h)};
}

std::vector<std::size_t> nms(std::span<const Box> boxes, std::span<const double> scores,
                             double iou_thresh) {
  if (boxes.size() != scores.size()) {
    throw std::invalid_argument("nms: " + std::to_string(boxes.size()) + " boxes but " +
                                std::to_string(scores.size()) + " scores");
  }
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<std::size_t> kept;
  std::vector<bool> suppressed(boxes.size(), false);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t i = order[oi];
    if (suppressed[i]) continue;
    kept.push_back(i);
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t j = order[oj];
      if (!suppressed[j] && iou(boxes[i], boxes[j]) > iou_thresh) suppressed[j] = true;
    }
  }
  return kept;
}

}  // namespace osrcnn
