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

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "owp/assignment.hpp"

namespace owp {

/// Toolkit-wide tunables with their stock defaults. JSON keys match field
/// names one to one; every CLI flag overrides its config value.
struct Config {
  std::vector<int> strides{8, 16, 32, 64, 128};
  // Half-open max-regression ranges per level; the last upper bound is
  // +infinity (serialized as "inf").
  std::vector<double> range_edges{0, 64, 128, 256, 512,
                                  std::numeric_limits<double>::infinity()};
  double center_radius = 1.5;
  double iou_sampling_threshold = 0.3;
  int pre_nms_k = 2000;
  double pre_nms_threshold = 0.05;
  double nms_iou = 0.6;
  int post_nms_n = 100;
  double post_nms_threshold = 0.0;
  double unknown_mask_threshold = 0.95;
  long long mask_start_iteration = 5000;
  std::string mask_variant = "pixel";     // pixel | area
  std::string mask_objectness = "iou";    // iou | centerness | geomean
  bool area_mask_trigger_nms = false;
  std::string sampling_mode = "cs_is";
  std::string scoring_mode = "iou";
  std::optional<bool> per_class_nms;      // absent: follow the scoring mode

  std::vector<FpnLevelSpec> levels() const {
    if (range_edges.size() != strides.size() + 1) {
      throw std::invalid_argument(
          "config: range_edges must have one more entry than strides");
    }
    std::vector<FpnLevelSpec> out;
    out.reserve(strides.size());
    for (std::size_t k = 0; k < strides.size(); ++k) {
      out.push_back(FpnLevelSpec{strides[k], range_edges[k], range_edges[k + 1]});
    }
    validate_levels(out);
    return out;
  }

  void validate() const {
    levels();
    if (!(center_radius > 0)) throw std::invalid_argument("config: center_radius must be positive");
    if (!(iou_sampling_threshold > 0 && iou_sampling_threshold < 1)) {
      throw std::invalid_argument("config: iou_sampling_threshold must lie in (0,1)");
    }
    if (pre_nms_k <= 0) throw std::invalid_argument("config: pre_nms_k must be positive");
    if (post_nms_n <= 0) throw std::invalid_argument("config: post_nms_n must be positive");
    if (!(nms_iou > 0 && nms_iou < 1)) throw std::invalid_argument("config: nms_iou must lie in (0,1)");
    if (!(unknown_mask_threshold > 0 && unknown_mask_threshold < 1)) {
      throw std::invalid_argument("config: unknown_mask_threshold must lie in (0,1)");
    }
    if (mask_start_iteration < 0) {
      throw std::invalid_argument("config: mask_start_iteration must be non-negative");
    }
    if (mask_variant != "pixel" && mask_variant != "area") {
      throw std::invalid_argument("config: mask_variant must be pixel or area");
    }
    if (mask_objectness != "iou" && mask_objectness != "centerness" &&
        mask_objectness != "geomean") {
      throw std::invalid_argument("config: mask_objectness must be iou, centerness or geomean");
    }
  }
};

}  // namespace owp
