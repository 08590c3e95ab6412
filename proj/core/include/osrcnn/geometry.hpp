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

// Axis-aligned box arithmetic shared by the proposal stage, the sampler and
// the evaluator. Boxes are corner-coordinate closed intervals in pixels and
// area is (x2 - x1) * (y2 - y1), with no +1 pixel convention.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace osrcnn {

struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }
  double center_x() const noexcept { return 0.5 * (x1 + x2); }
  double center_y() const noexcept { return 0.5 * (y1 + y2); }

  /// Finite corners with x1 <= x2 and y1 <= y2.
  bool is_valid() const noexcept;
  /// Valid and with strictly positive width and height.
  bool has_area() const noexcept;

  /// COCO [x, y, w, h] to corner form.
  static Box from_xywh(double x, double y, double w, double h) noexcept {
    return {x, y, x + w, y + h};
  }
  std::array<double, 4> to_xywh() const noexcept { return {x1, y1, width(), height()}; }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Distances from an anchor location to the left, top, right and bottom edges.
struct LtrbOffsets {
  double l = 0.0;
  double t = 0.0;
  double r = 0.0;
  double b = 0.0;
};

/// Faster-RCNN regression deltas: center shift over size, log size ratio.
struct DeltaXYWH {
  double dx = 0.0;
  double dy = 0.0;
  double dw = 0.0;
  double dh = 0.0;
};

struct Location {
  double x = 0.0;
  double y = 0.0;
};

/// Intersection over union. Zero-area boxes have IoU 0 with everything,
/// themselves included.
double iou(const Box& a, const Box& b) noexcept;

Box decode_ltrb(const Location& loc, const LtrbOffsets& o);

/// Throws std::invalid_argument when `loc` lies outside `box`.
LtrbOffsets encode_ltrb(const Location& loc, const Box& box);

/// sqrt(min(l,r)/max(l,r) * min(t,b)/max(t,b)); 0 when an axis pair is (0,0).
double centerness(const LtrbOffsets& o);

/// Both throw std::invalid_argument for a base (or target) without area.
Box apply_delta(const Box& base, const DeltaXYWH& d);
DeltaXYWH encode_delta(const Box& base, const Box& target);

/// Greedy non-maximum suppression. Returns kept indices ordered by
/// descending score; equal scores keep the lower input index first. A box is
/// suppressed when its IoU with an already kept box exceeds `iou_thresh`.
std::vector<std::size_t> nms(std::span<const Box> boxes, std::span<const double> scores,
                             double iou_thresh);

}  // namespace osrcnn
