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

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "owp/assignment.hpp"
#include "owp/dense_map.hpp"
#include "owp/pipeline.hpp"
#include "owp/predictions.hpp"

namespace owp {

/// Which locations to exclude from background classification supervision.
/// Excluded locations are always a subset of the non-foreground ones.
struct BackgroundMask {
  std::vector<std::vector<std::uint8_t>> levels;

  std::size_t excluded_count() const {
    std::size_t n = 0;
    for (const auto& lv : levels) {
      for (auto v : lv) n += (v != 0);
    }
    return n;
  }

  bool excluded(std::size_t level, std::size_t idx) const {
    return levels[level][idx] != 0;
  }
};

inline void check_mask_inputs(const std::vector<DenseMap>& objectness,
                              const AssignmentResult& assignment,
                              double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("mask threshold must lie in (0,1)");
  }
  if (objectness.size() != assignment.levels.size()) {
    throw std::invalid_argument("mask: level count mismatch");
  }
  for (std::size_t k = 0; k < objectness.size(); ++k) {
    require_same_shape(objectness[k], assignment.levels[k].grid.height,
                       assignment.levels[k].grid.width, "mask");
  }
}

/// Pixel-level unknown-object masking: a non-foreground location is
/// excluded iff its objectness score is strictly above the threshold.
inline BackgroundMask unknown_object_mask(const std::vector<DenseMap>& objectness,
                                          const AssignmentResult& assignment,
                                          double threshold) {
  check_mask_inputs(objectness, assignment, threshold);
  BackgroundMask mask;
  mask.levels.resize(assignment.levels.size());
  for (std::size_t k = 0; k < assignment.levels.size(); ++k) {
    const auto& lv = assignment.levels[k];
    mask.levels[k].assign(lv.matched_gt.size(), 0);
    for (std::size_t idx = 0; idx < lv.matched_gt.size(); ++idx) {
      if (!lv.is_foreground(idx) &&
          static_cast<double>(objectness[k].values[idx]) > threshold) {
        mask.levels[k][idx] = 1;
      }
    }
  }
  return mask;
}

/// Box-level variant: every trigger location (non-foreground, objectness
/// above threshold) decodes its predicted box, and all non-foreground
/// locations on any level whose coordinates fall inside a trigger box
/// (bounds inclusive) are excluded. Trigger locations themselves are always
/// excluded, so the pixel mask is a subset of this one; triggers whose
/// regression decodes to a degenerate box contribute no box. Optional
/// greedy NMS over trigger boxes (scored by objectness) thins the box set
/// before the union.
inline BackgroundMask unknown_area_mask(const std::vector<DenseMap>& objectness,
                                        const DensePredictions& preds,
                                        const AssignmentResult& assignment,
                                        double threshold,
                                        bool nms_triggers = false,
                                        double trigger_nms_iou = 0.6) {
  check_mask_inputs(objectness, assignment, threshold);
  if (preds.levels.size() != assignment.levels.size()) {
    throw std::invalid_argument("unknown_area_mask: level count mismatch");
  }

  BackgroundMask mask = unknown_object_mask(objectness, assignment, threshold);

  std::vector<Proposal> triggers;
  for (std::size_t k = 0; k < assignment.levels.size(); ++k) {
    const auto& lv = assignment.levels[k];
    const auto& lp = preds.levels[k];
    if (lp.height != lv.grid.height || lp.width != lv.grid.width) {
      throw std::invalid_argument("unknown_area_mask: prediction shape mismatch");
    }
    for (int i = 0; i < lv.grid.height; ++i) {
      for (int j = 0; j < lv.grid.width; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * lv.grid.width + j;
        if (!mask.levels[k][idx]) continue;  // not a trigger
        const Ltrb d = lp.regression_at(i, j);
        if (d.l + d.r <= 0.0 || d.t + d.b <= 0.0) continue;  // degenerate: skip
        Proposal p;
        p.box = ltrb_to_box(lv.grid.loc_x(j), lv.grid.loc_y(i), d);
        p.score = objectness[k].values[idx];
        p.level = static_cast<int>(k);
        p.row = i;
        p.col = j;
        triggers.push_back(p);
      }
    }
  }
  if (nms_triggers) {
    triggers = nms(std::move(triggers), trigger_nms_iou);
  }

  for (std::size_t k = 0; k < assignment.levels.size(); ++k) {
    const auto& lv = assignment.levels[k];
    for (int i = 0; i < lv.grid.height; ++i) {
      for (int j = 0; j < lv.grid.width; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * lv.grid.width + j;
        if (lv.is_foreground(idx) || mask.levels[k][idx]) continue;
        const double x = lv.grid.loc_x(j);
        const double y = lv.grid.loc_y(i);
        for (const auto& trig : triggers) {
          if (trig.box.contains_closed(x, y)) {
            mask.levels[k][idx] = 1;
            break;
          }
        }
      }
    }
  }
  return mask;
}

/// Masking becomes active once the training iteration reaches the
/// configured start.
inline bool masking_schedule(long long iteration, long long start_iteration) {
  if (iteration < 0 || start_iteration < 0) {
    throw std::invalid_argument("masking_schedule: iterations must be non-negative");
  }
  return iteration >= start_iteration;
}

}  // namespace owp
