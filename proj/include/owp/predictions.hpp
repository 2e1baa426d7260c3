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
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "owp/geometry.hpp"

namespace owp {

/// Dense per-level prediction maps. All maps are row-major with channels
/// last; regression carries four channels in (l, r, t, b) order. Scores
/// live in [0, 1], regression components are non-negative.
struct LevelPredictions {
  int stride = 0;
  int height = 0;
  int width = 0;
  int num_classes = 0;

  std::vector<float> classification;  // H * W * num_classes
  std::vector<float> regression;      // H * W * 4
  std::vector<float> centerness;      // H * W
  std::vector<float> iou;             // H * W

  std::size_t location_count() const {
    return static_cast<std::size_t>(height) * width;
  }

  float cls_at(int i, int j, int c) const {
    return classification[(static_cast<std::size_t>(i) * width + j) * num_classes + c];
  }
  float& cls_at(int i, int j, int c) {
    return classification[(static_cast<std::size_t>(i) * width + j) * num_classes + c];
  }

  Ltrb regression_at(int i, int j) const {
    const std::size_t base = (static_cast<std::size_t>(i) * width + j) * 4;
    return Ltrb{regression[base], regression[base + 1], regression[base + 2],
                regression[base + 3]};
  }
  void set_regression(int i, int j, const Ltrb& d) {
    const std::size_t base = (static_cast<std::size_t>(i) * width + j) * 4;
    regression[base] = static_cast<float>(d.l);
    regression[base + 1] = static_cast<float>(d.r);
    regression[base + 2] = static_cast<float>(d.t);
    regression[base + 3] = static_cast<float>(d.b);
  }

  float ctr_at(int i, int j) const {
    return centerness[static_cast<std::size_t>(i) * width + j];
  }
  float iou_at(int i, int j) const {
    return iou[static_cast<std::size_t>(i) * width + j];
  }
};

struct DensePredictions {
  std::vector<LevelPredictions> levels;
};

inline LevelPredictions make_level_predictions(int stride, int height,
                                               int width, int num_classes) {
  LevelPredictions lp;
  lp.stride = stride;
  lp.height = height;
  lp.width = width;
  lp.num_classes = num_classes;
  const std::size_t n = static_cast<std::size_t>(height) * width;
  lp.classification.assign(n * num_classes, 0.0f);
  lp.regression.assign(n * 4, 0.0f);
  lp.centerness.assign(n, 0.0f);
  lp.iou.assign(n, 0.0f);
  return lp;
}

inline void validate_predictions(const DensePredictions& preds) {
  for (std::size_t k = 0; k < preds.levels.size(); ++k) {
    const auto& lp = preds.levels[k];
    const std::string where = "level " + std::to_string(k);
    if (lp.stride <= 0 || lp.height <= 0 || lp.width <= 0 || lp.num_classes < 0) {
      throw std::invalid_argument(where + ": non-positive map dimensions");
    }
    const std::size_t n = lp.location_count();
    if (lp.classification.size() != n * lp.num_classes ||
        lp.regression.size() != n * 4 || lp.centerness.size() != n ||
        lp.iou.size() != n) {
      throw std::invalid_argument(where + ": map sizes disagree with shape");
    }
    for (float v : lp.classification) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw std::invalid_argument(where + ": classification score outside [0,1]");
      }
    }
    for (float v : lp.centerness) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw std::invalid_argument(where + ": centerness score outside [0,1]");
      }
    }
    for (float v : lp.iou) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw std::invalid_argument(where + ": iou score outside [0,1]");
      }
    }
    for (float v : lp.regression) {
      if (!(v >= 0.0f) || !std::isfinite(v)) {
        throw std::invalid_argument(where + ": negative or non-finite regression");
      }
    }
  }
}

}  // namespace owp
