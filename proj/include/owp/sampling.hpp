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

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "owp/assignment.hpp"
#include "owp/dense_map.hpp"

namespace owp {

/// Objectness-branch training regimes:
///   kFcosDefault - foreground locations that survived center sampling,
///                  raw targets
///   kCsIs        - center sampling plus IOU sampling of the targets
///   kAll         - every location on every level, background target 0
enum class SamplingMode { kFcosDefault, kCsIs, kAll };

inline SamplingMode parse_sampling_mode(const std::string& s) {
  if (s == "fcos_default") return SamplingMode::kFcosDefault;
  if (s == "cs_is") return SamplingMode::kCsIs;
  if (s == "all") return SamplingMode::kAll;
  throw std::invalid_argument("unknown sampling mode '" + s +
                              "' (expected fcos_default, cs_is, all)");
}

inline const char* sampling_mode_name(SamplingMode m) {
  switch (m) {
    case SamplingMode::kFcosDefault: return "fcos_default";
    case SamplingMode::kCsIs: return "cs_is";
    case SamplingMode::kAll: return "all";
  }
  return "?";
}

struct TrainingSample {
  int level = 0;
  int row = 0;
  int col = 0;
  double target = 0.0;
  bool foreground = false;
};

struct ObjectnessTrainingSet {
  std::vector<TrainingSample> samples;
  std::size_t foreground_samples = 0;
  std::size_t background_samples = 0;
};

/// Zero out foreground targets strictly below `threshold`; targets at or
/// above the threshold and background values are untouched. Turns
/// low-quality in-box locations into hard negatives and removes all target
/// mass from the open interval (0, threshold).
inline std::vector<DenseMap> iou_sampling(const std::vector<DenseMap>& iou_targets,
                                          const AssignmentResult& assignment,
                                          double threshold = 0.3) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("iou_sampling: threshold must lie in (0,1)");
  }
  if (iou_targets.size() != assignment.levels.size()) {
    throw std::invalid_argument("iou_sampling: level count mismatch");
  }
  std::vector<DenseMap> out = iou_targets;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& lv = assignment.levels[k];
    require_same_shape(out[k], lv.grid.height, lv.grid.width, "iou_sampling");
    for (std::size_t idx = 0; idx < lv.matched_gt.size(); ++idx) {
      if (lv.is_foreground(idx) &&
          static_cast<double>(out[k].values[idx]) < threshold) {
        out[k].values[idx] = 0.0f;
      }
    }
  }
  return out;
}

inline ObjectnessTrainingSet build_objectness_training_set(
    const AssignmentResult& assignment, const std::vector<DenseMap>& iou_targets,
    SamplingMode mode, double iou_sampling_threshold = 0.3) {
  if (iou_targets.size() != assignment.levels.size()) {
    throw std::invalid_argument("build_objectness_training_set: level count mismatch");
  }
  const std::vector<DenseMap>* targets = &iou_targets;
  std::vector<DenseMap> sampled;
  if (mode == SamplingMode::kCsIs) {
    sampled = iou_sampling(iou_targets, assignment, iou_sampling_threshold);
    targets = &sampled;
  }

  ObjectnessTrainingSet set;
  for (std::size_t k = 0; k < assignment.levels.size(); ++k) {
    const auto& lv = assignment.levels[k];
    require_same_shape((*targets)[k], lv.grid.height, lv.grid.width,
                       "build_objectness_training_set");
    for (int i = 0; i < lv.grid.height; ++i) {
      for (int j = 0; j < lv.grid.width; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * lv.grid.width + j;
        const bool fg = lv.is_foreground(idx);
        const bool cs = lv.center_sampled[idx] != 0;
        TrainingSample s;
        s.level = static_cast<int>(k);
        s.row = i;
        s.col = j;
        s.foreground = fg;
        switch (mode) {
          case SamplingMode::kFcosDefault:
          case SamplingMode::kCsIs:
            if (!(fg && cs)) continue;
            s.target = (*targets)[k].at(i, j);
            break;
          case SamplingMode::kAll:
            s.target = fg ? static_cast<double>((*targets)[k].at(i, j)) : 0.0;
            break;
        }
        set.samples.push_back(s);
        if (fg) {
          ++set.foreground_samples;
        } else {
          ++set.background_samples;
        }
      }
    }
  }
  return set;
}

struct SampleBalanceStats {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  double ratio = 0.0;  // positives / negatives; +inf when only positives
};

/// Positive/negative counts at a target cut; empty sets yield all zeros.
inline SampleBalanceStats sample_balance_stats(const ObjectnessTrainingSet& set,
                                               double positive_cut = 0.5) {
  if (!(positive_cut > 0.0 && positive_cut < 1.0)) {
    throw std::invalid_argument("sample_balance_stats: cut must lie in (0,1)");
  }
  SampleBalanceStats stats;
  for (const auto& s : set.samples) {
    if (s.target > positive_cut) {
      ++stats.positives;
    } else {
      ++stats.negatives;
    }
  }
  if (stats.negatives > 0) {
    stats.ratio = static_cast<double>(stats.positives) / stats.negatives;
  } else if (stats.positives > 0) {
    stats.ratio = std::numeric_limits<double>::infinity();
  }
  return stats;
}

}  // namespace owp
