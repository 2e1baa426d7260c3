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
#include <stdexcept>
#include <string>

#include "owp/geometry.hpp"

namespace owp {

/// Reference loss values for target verification and harness monitoring.
/// All functions take probabilities; applying a sigmoid to raw logits is
/// the caller's concern.

struct FocalParams {
  double alpha = 0.25;
  double gamma = 2.0;
};

inline void require_open_unit(double pred, const char* fn) {
  if (!(pred > 0.0 && pred < 1.0)) {
    throw std::domain_error(std::string(fn) +
                            ": prediction must lie strictly in (0,1)");
  }
}

inline double bce_loss(double pred, double target) {
  require_open_unit(pred, "bce_loss");
  if (!(target >= 0.0 && target <= 1.0)) {
    throw std::invalid_argument("bce_loss: target must lie in [0,1]");
  }
  return -(target * std::log(pred) + (1.0 - target) * std::log(1.0 - pred));
}

/// -ln(IOU) of the two tuples; zero exactly at a perfect prediction.
inline double iou_loss(const Ltrb& pred, const Ltrb& target) {
  const double iou = iou_ltrb(pred, target);
  if (iou <= 0.0) {
    throw std::domain_error("iou_loss: IOU is zero");
  }
  return -std::log(iou);
}

inline double focal_loss(double pred, bool label, const FocalParams& params = {}) {
  require_open_unit(pred, "focal_loss");
  if (!(params.alpha > 0.0 && params.alpha < 1.0) || !(params.gamma >= 0.0)) {
    throw std::invalid_argument("focal_loss: alpha in (0,1), gamma >= 0 required");
  }
  const double p_t = label ? pred : 1.0 - pred;
  const double alpha_t = label ? params.alpha : 1.0 - params.alpha;
  return -alpha_t * std::pow(1.0 - p_t, params.gamma) * std::log(p_t);
}

}  // namespace owp
