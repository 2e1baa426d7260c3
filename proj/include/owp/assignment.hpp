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

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "owp/dense_map.hpp"
#include "owp/geometry.hpp"
#include "owp/predictions.hpp"

namespace owp {

/// One pyramid level: its stride and the half-open interval
/// [range_min, range_max) of maximum regression distances it owns.
/// range_max may be +infinity on the coarsest level.
struct FpnLevelSpec {
  int stride = 0;
  double range_min = 0.0;
  double range_max = std::numeric_limits<double>::infinity();
};

/// Levels must have strictly increasing strides and contiguous,
/// non-overlapping ranges (level k's max equals level k+1's min).
inline void validate_levels(const std::vector<FpnLevelSpec>& levels) {
  if (levels.empty()) {
    throw std::invalid_argument("level list is empty");
  }
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto& lv = levels[k];
    if (lv.stride <= 0) {
      throw std::invalid_argument("level " + std::to_string(k) +
                                  ": stride must be positive");
    }
    if (!(lv.range_min < lv.range_max)) {
      throw std::invalid_argument("level " + std::to_string(k) +
                                  ": empty regression range");
    }
    if (k > 0) {
      if (levels[k].stride <= levels[k - 1].stride) {
        throw std::invalid_argument("strides must strictly increase");
      }
      if (levels[k].range_min != levels[k - 1].range_max) {
        throw std::invalid_argument("level ranges must be contiguous");
      }
    }
  }
}

/// Lattice of prediction locations for one level. Grid cell (i, j) sits at
/// image coordinate (floor(stride/2) + j*stride, floor(stride/2) + i*stride).
struct LocationGrid {
  int level = 0;
  int stride = 0;
  int height = 0;
  int width = 0;

  double loc_x(int j) const { return stride / 2 + j * static_cast<double>(stride); }
  double loc_y(int i) const { return stride / 2 + i * static_cast<double>(stride); }
  std::size_t location_count() const {
    return static_cast<std::size_t>(height) * width;
  }
};

inline LocationGrid make_locations(int image_h, int image_w,
                                   const FpnLevelSpec& level) {
  if (image_h <= 0 || image_w <= 0) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  if (level.stride <= 0) {
    throw std::invalid_argument("stride must be positive");
  }
  LocationGrid grid;
  grid.stride = level.stride;
  grid.height = (image_h + level.stride - 1) / level.stride;
  grid.width = (image_w + level.stride - 1) / level.stride;
  return grid;
}

inline std::vector<LocationGrid> make_location_grids(
    int image_h, int image_w, const std::vector<FpnLevelSpec>& levels) {
  validate_levels(levels);
  std::vector<LocationGrid> grids;
  grids.reserve(levels.size());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    LocationGrid g = make_locations(image_h, image_w, levels[k]);
    g.level = static_cast<int>(k);
    grids.push_back(g);
  }
  return grids;
}

/// Per-level assignment of locations to ground-truth boxes. matched_gt is
/// -1 for background; regression/centerness targets are zero there and the
/// three foreground fields are always populated together.
struct LevelAssignment {
  LocationGrid grid;
  std::vector<std::int32_t> matched_gt;
  std::vector<Ltrb> regression_target;
  std::vector<double> centerness_target;
  std::vector<std::uint8_t> center_sampled;

  bool is_foreground(std::size_t idx) const { return matched_gt[idx] >= 0; }

  std::size_t foreground_count() const {
    std::size_t n = 0;
    for (auto m : matched_gt) n += (m >= 0);
    return n;
  }
};

struct AssignmentResult {
  std::vector<LevelAssignment> levels;

  std::size_t location_count() const {
    std::size_t n = 0;
    for (const auto& lv : levels) n += lv.matched_gt.size();
    return n;
  }
  std::size_t foreground_count() const {
    std::size_t n = 0;
    for (const auto& lv : levels) n += lv.foreground_count();
    return n;
  }
  std::size_t center_sampled_count() const {
    std::size_t n = 0;
    for (const auto& lv : levels) {
      for (auto c : lv.center_sampled) n += (c != 0);
    }
    return n;
  }
};

/// Assign every location its ground-truth match and training targets.
///
/// The owning box of a location is the smallest-area box that strictly
/// contains it (lowest index on exact area ties). The location is
/// foreground iff that box's maximum side distance falls inside its
/// level's range; the range never changes which box a location decodes
/// to, only whether it is foreground. center_sampled marks foreground
/// locations within the axis-aligned square of half-side
/// center_radius * stride around the matched box center (clipped to the
/// box, bounds inclusive).
inline AssignmentResult assign_targets(const std::vector<BoxXYXY>& boxes,
                                       const std::vector<FpnLevelSpec>& levels,
                                       const std::vector<LocationGrid>& grids,
                                       double center_radius) {
  validate_levels(levels);
  if (grids.size() != levels.size()) {
    throw std::invalid_argument("grid count does not match level count");
  }
  if (!(center_radius > 0.0)) {
    throw std::invalid_argument("center_radius must be positive");
  }
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    validate_box(boxes[b], ("box " + std::to_string(b)).c_str());
  }

  std::vector<double> areas(boxes.size());
  for (std::size_t b = 0; b < boxes.size(); ++b) areas[b] = boxes[b].area();

  AssignmentResult result;
  result.levels.resize(levels.size());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    auto& lv = result.levels[k];
    lv.grid = grids[k];
    lv.grid.level = static_cast<int>(k);
    const std::size_t n = lv.grid.location_count();
    lv.matched_gt.assign(n, -1);
    lv.regression_target.assign(n, Ltrb{});
    lv.centerness_target.assign(n, 0.0);
    lv.center_sampled.assign(n, 0);

    const double radius = center_radius * levels[k].stride;
    for (int i = 0; i < lv.grid.height; ++i) {
      const double y = lv.grid.loc_y(i);
      for (int j = 0; j < lv.grid.width; ++j) {
        const double x = lv.grid.loc_x(j);
        int best = -1;
        double best_area = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < boxes.size(); ++b) {
          if (boxes[b].contains_strict(x, y) && areas[b] < best_area) {
            best = static_cast<int>(b);
            best_area = areas[b];
          }
        }
        if (best < 0) continue;
        const BoxXYXY& box = boxes[best];
        const Ltrb target{x - box.x1, box.x2 - x, y - box.y1, box.y2 - y};
        const double m = target.max_component();
        if (!(m >= levels[k].range_min && m < levels[k].range_max)) continue;

        const std::size_t idx = static_cast<std::size_t>(i) * lv.grid.width + j;
        lv.matched_gt[idx] = best;
        lv.regression_target[idx] = target;
        lv.centerness_target[idx] = centerness_target(target);
        lv.center_sampled[idx] = (std::abs(x - box.center_x()) <= radius &&
                                  std::abs(y - box.center_y()) <= radius)
                                     ? 1
                                     : 0;
      }
    }
  }
  return result;
}

/// Per-location IOU between predicted regression and the assigned target;
/// background locations carry 0.
inline std::vector<DenseMap> compute_iou_targets(
    const AssignmentResult& assignment, const DensePredictions& preds) {
  if (preds.levels.size() != assignment.levels.size()) {
    throw std::invalid_argument("compute_iou_targets: level count mismatch");
  }
  std::vector<DenseMap> out;
  out.reserve(assignment.levels.size());
  for (std::size_t k = 0; k < assignment.levels.size(); ++k) {
    const auto& lv = assignment.levels[k];
    const auto& lp = preds.levels[k];
    if (lp.height != lv.grid.height || lp.width != lv.grid.width) {
      throw std::invalid_argument("compute_iou_targets: shape mismatch at level " +
                                  std::to_string(k));
    }
    DenseMap map(lv.grid.height, lv.grid.width, 0.0f);
    for (int i = 0; i < lv.grid.height; ++i) {
      for (int j = 0; j < lv.grid.width; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * lv.grid.width + j;
        if (!lv.is_foreground(idx)) continue;
        map.at(i, j) = static_cast<float>(
            iou_ltrb(lp.regression_at(i, j), lv.regression_target[idx]));
      }
    }
    out.push_back(std::move(map));
  }
  return out;
}

}  // namespace owp
