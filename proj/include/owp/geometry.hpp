// Copyright 2026 The owpkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace owp {

/// Axis-aligned box in corner form, image-pixel coordinates.
/// Valid boxes have strictly positive area and finite coordinates.
struct BoxXYXY {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
  std::optional<int> category_id;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }

  bool is_valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2) && x1 < x2 && y1 < y2;
  }

  /// Strict interior test; boundary points are outside by convention.
  bool contains_strict(double x, double y) const {
    return x > x1 && x < x2 && y > y1 && y < y2;
  }

  /// Closed containment, used by area masking.
  bool contains_closed(double x, double y) const {
    return x >= x1 && x <= x2 && y >= y1 && y <= y2;
  }

  bool operator==(const BoxXYXY& o) const {
    return x1 == o.x1 && y1 == o.y1 && x2 == o.x2 && y2 == o.y2;
  }
};

inline void validate_box(const BoxXYXY& b, const char* what = "box") {
  if (!b.is_valid()) {
    throw std::invalid_argument(std::string(what) +
                                " is degenerate or non-finite");
  }
}

/// Per-pixel distances from a location to the left/right/top/bottom box
/// sides. Serves both as regression target and prediction unit.
struct Ltrb {
  double l = 0.0;
  double r = 0.0;
  double t = 0.0;
  double b = 0.0;

  bool is_valid() const {
    return l >= 0 && r >= 0 && t >= 0 && b >= 0 && std::isfinite(l) &&
           std::isfinite(r) && std::isfinite(t) && std::isfinite(b);
  }

  double max_component() const { return std::max({l, r, t, b}); }

  bool operator==(const Ltrb& o) const {
    return l == o.l && r == o.r && t == o.t && b == o.b;
  }
};

inline void validate_ltrb(const Ltrb& d, const char* what = "ltrb") {
  if (!d.is_valid()) {
    throw std::invalid_argument(std::string(what) +
                                " has negative or non-finite components");
  }
}

/// Centerness of a regression target:
///   sqrt( min(l,r)/max(l,r) * min(t,b)/max(t,b) )
/// 1 at the box center, 0 on the box edge.
inline double centerness_target(const Ltrb& d) {
  validate_ltrb(d);
  if (d.l + d.r <= 0.0 || d.t + d.b <= 0.0) {
    throw std::domain_error("centerness_target: degenerate ltrb");
  }
  const double h = std::min(d.l, d.r) / std::max(d.l, d.r);
  const double v = std::min(d.t, d.b) / std::max(d.t, d.b);
  return std::sqrt(h * v);
}

/// IOU of two boxes expressed as side-distance tuples at a common pixel:
///   I = (min(l,l') + min(r,r')) * (min(b,b') + min(t,t'))
///   U = (l'+r')*(t'+b') + (l+r)*(t+b) - I
inline double iou_ltrb(const Ltrb& pred, const Ltrb& target) {
  validate_ltrb(pred, "pred");
  validate_ltrb(target, "target");
  const double inter = (std::min(pred.l, target.l) + std::min(pred.r, target.r)) *
                       (std::min(pred.b, target.b) + std::min(pred.t, target.t));
  const double uni = (target.l + target.r) * (target.t + target.b) +
                     (pred.l + pred.r) * (pred.t + pred.b) - inter;
  if (uni <= 0.0) {
    throw std::domain_error("iou_ltrb: union is not positive");
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Standard corner-form IOU; 0 when disjoint.
inline double iou_xyxy(const BoxXYXY& a, const BoxXYXY& b) {
  validate_box(a, "a");
  validate_box(b, "b");
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Decode side distances at location (x, y) into a corner-form box.
inline BoxXYXY ltrb_to_box(double x, double y, const Ltrb& d) {
  validate_ltrb(d);
  if (d.l + d.r <= 0.0 || d.t + d.b <= 0.0) {
    throw std::invalid_argument("ltrb_to_box: decoded box is degenerate");
  }
  return BoxXYXY{x - d.l, y - d.t, x + d.r, y + d.b};
}

/// Side distances of (x, y) inside `box`, or nullopt when the location is
/// outside or on the boundary (such pixels are background).
inline std::optional<Ltrb> box_to_ltrb(double x, double y, const BoxXYXY& box) {
  validate_box(box);
  if (!box.contains_strict(x, y)) return std::nullopt;
  return Ltrb{x - box.x1, box.x2 - x, y - box.y1, box.y2 - y};
}

}  // namespace owp
