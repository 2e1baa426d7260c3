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
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "owp/dense_map.hpp"
#include "owp/geometry.hpp"
#include "owp/predictions.hpp"

namespace owp {

/// Proposal scoring recipes. The logits variants take the per-location
/// maximum classification score times the chosen objectness map and record
/// the argmax channel.
enum class ScoringMode {
  kCenterness,
  kIou,
  kGeomean,
  kLogitsCenterness,
  kLogitsIou,
};

inline ScoringMode parse_scoring_mode(const std::string& s) {
  if (s == "centerness") return ScoringMode::kCenterness;
  if (s == "iou") return ScoringMode::kIou;
  if (s == "geomean") return ScoringMode::kGeomean;
  if (s == "logits-centerness") return ScoringMode::kLogitsCenterness;
  if (s == "logits-iou") return ScoringMode::kLogitsIou;
  throw std::invalid_argument(
      "unknown scoring mode '" + s +
      "' (expected centerness, iou, geomean, logits-centerness, logits-iou)");
}

inline const char* scoring_mode_name(ScoringMode m) {
  switch (m) {
    case ScoringMode::kCenterness: return "centerness";
    case ScoringMode::kIou: return "iou";
    case ScoringMode::kGeomean: return "geomean";
    case ScoringMode::kLogitsCenterness: return "logits-centerness";
    case ScoringMode::kLogitsIou: return "logits-iou";
  }
  return "?";
}

inline bool scoring_mode_uses_classes(ScoringMode m) {
  return m == ScoringMode::kLogitsCenterness || m == ScoringMode::kLogitsIou;
}

struct Proposal {
  BoxXYXY box;
  double score = 0.0;
  std::optional<int> class_id;  // classification channel for logits modes
  int level = 0;
  int row = 0;
  int col = 0;
};

/// Deterministic proposal order: score descending, then (level, row, col)
/// ascending so floating-point ties resolve the same way everywhere.
inline bool proposal_before(const Proposal& a, const Proposal& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.level != b.level) return a.level < b.level;
  if (a.row != b.row) return a.row < b.row;
  return a.col < b.col;
}

struct ScoreMaps {
  std::vector<DenseMap> score;
  // Argmax classification channel per location; empty unless a logits mode.
  std::vector<std::vector<std::int32_t>> class_ids;
};

inline ScoreMaps score_map(const DensePredictions& preds, ScoringMode mode) {
  ScoreMaps out;
  out.score.reserve(preds.levels.size());
  const bool with_classes = scoring_mode_uses_classes(mode);
  for (const auto& lp : preds.levels) {
    DenseMap map(lp.height, lp.width, 0.0f);
    std::vector<std::int32_t> cls;
    if (with_classes) {
      if (lp.num_classes <= 0) {
        throw std::invalid_argument(
            "score_map: logits mode requires classification channels");
      }
      cls.assign(lp.location_count(), 0);
    }
    for (int i = 0; i < lp.height; ++i) {
      for (int j = 0; j < lp.width; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * lp.width + j;
        double s = 0.0;
        switch (mode) {
          case ScoringMode::kCenterness:
            s = lp.ctr_at(i, j);
            break;
          case ScoringMode::kIou:
            s = lp.iou_at(i, j);
            break;
          case ScoringMode::kGeomean:
            s = std::sqrt(static_cast<double>(lp.ctr_at(i, j)) * lp.iou_at(i, j));
            break;
          case ScoringMode::kLogitsCenterness:
          case ScoringMode::kLogitsIou: {
            int best_c = 0;
            double best = lp.cls_at(i, j, 0);
            for (int c = 1; c < lp.num_classes; ++c) {
              if (lp.cls_at(i, j, c) > best) {
                best = lp.cls_at(i, j, c);
                best_c = c;
              }
            }
            const double objectness = (mode == ScoringMode::kLogitsCenterness)
                                          ? lp.ctr_at(i, j)
                                          : lp.iou_at(i, j);
            s = best * objectness;
            cls[idx] = best_c;
            break;
          }
        }
        map.at(i, j) = static_cast<float>(s);
      }
    }
    out.score.push_back(std::move(map));
    if (with_classes) out.class_ids.push_back(std::move(cls));
  }
  return out;
}

struct PipelineParams {
  int pre_nms_k = 2000;
  double pre_nms_threshold = 0.05;
  double nms_iou = 0.6;
  int post_nms_n = 100;
  double post_nms_threshold = 0.0;
  // When unset, logits modes suppress per class and pure-objectness modes
  // suppress class-agnostically.
  std::optional<bool> per_class_nms;
  // Decoded boxes are clipped to [0,image_width] x [0,image_height];
  // 0 means "derive an upper bound from the level-0 grid".
  int image_width = 0;
  int image_height = 0;
};

/// Decode every location scoring strictly above the threshold and keep the
/// k best. Locations whose regression decodes to a degenerate box, or whose
/// clipped box is empty, are dropped.
inline std::vector<Proposal> select_pre_nms(const DensePredictions& preds,
                                            const ScoreMaps& scores, int k,
                                            double score_threshold,
                                            int image_width = 0,
                                            int image_height = 0) {
  if (k <= 0) throw std::invalid_argument("select_pre_nms: k must be positive");
  if (scores.score.size() != preds.levels.size()) {
    throw std::invalid_argument("select_pre_nms: level count mismatch");
  }
  double clip_w = image_width;
  double clip_h = image_height;
  if ((image_width <= 0 || image_height <= 0) && !preds.levels.empty()) {
    const auto& l0 = preds.levels.front();
    clip_w = static_cast<double>(l0.stride) * l0.width;
    clip_h = static_cast<double>(l0.stride) * l0.height;
  }

  std::vector<Proposal> props;
  for (std::size_t kk = 0; kk < preds.levels.size(); ++kk) {
    const auto& lp = preds.levels[kk];
    require_same_shape(scores.score[kk], lp.height, lp.width, "select_pre_nms");
    const double off = lp.stride / 2;
    for (int i = 0; i < lp.height; ++i) {
      for (int j = 0; j < lp.width; ++j) {
        const double s = scores.score[kk].at(i, j);
        if (!(s > score_threshold)) continue;
        const Ltrb d = lp.regression_at(i, j);
        if (d.l + d.r <= 0.0 || d.t + d.b <= 0.0) continue;
        const double x = off + j * static_cast<double>(lp.stride);
        const double y = off + i * static_cast<double>(lp.stride);
        BoxXYXY box = ltrb_to_box(x, y, d);
        box.x1 = std::max(box.x1, 0.0);
        box.y1 = std::max(box.y1, 0.0);
        box.x2 = std::min(box.x2, clip_w);
        box.y2 = std::min(box.y2, clip_h);
        if (!(box.x1 < box.x2 && box.y1 < box.y2)) continue;

        Proposal p;
        p.box = box;
        p.score = s;
        p.level = static_cast<int>(kk);
        p.row = i;
        p.col = j;
        if (!scores.class_ids.empty()) {
          p.class_id = scores.class_ids[kk][static_cast<std::size_t>(i) * lp.width + j];
        }
        props.push_back(p);
      }
    }
  }
  std::sort(props.begin(), props.end(), proposal_before);
  if (props.size() > static_cast<std::size_t>(k)) props.resize(k);
  return props;
}

/// Greedy non-maximum suppression. Keeps the best remaining proposal and
/// discards everything overlapping it by more than iou_threshold. Input is
/// re-sorted with the deterministic order if needed; kept proposals stay in
/// that order. Per-class mode only suppresses within matching class ids.
inline std::vector<Proposal> nms(std::vector<Proposal> proposals,
                                 double iou_threshold, bool per_class = false) {
  if (!std::is_sorted(proposals.begin(), proposals.end(), proposal_before)) {
    std::sort(proposals.begin(), proposals.end(), proposal_before);
  }
  std::vector<Proposal> kept;
  std::vector<bool> suppressed(proposals.size(), false);
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(proposals[i]);
    for (std::size_t j = i + 1; j < proposals.size(); ++j) {
      if (suppressed[j]) continue;
      if (per_class && proposals[i].class_id != proposals[j].class_id) continue;
      if (iou_xyxy(proposals[i].box, proposals[j].box) > iou_threshold) {
        suppressed[j] = true;
      }
    }
  }
  return kept;
}

/// Drop proposals scoring below the threshold, then keep the top n.
inline std::vector<Proposal> select_post_nms(std::vector<Proposal> proposals,
                                             int n, double post_threshold = 0.0) {
  if (n <= 0) throw std::invalid_argument("select_post_nms: n must be positive");
  if (!std::is_sorted(proposals.begin(), proposals.end(), proposal_before)) {
    std::sort(proposals.begin(), proposals.end(), proposal_before);
  }
  std::vector<Proposal> out;
  out.reserve(std::min<std::size_t>(proposals.size(), n));
  for (const auto& p : proposals) {
    if (p.score < post_threshold) continue;
    out.push_back(p);
    if (out.size() == static_cast<std::size_t>(n)) break;
  }
  return out;
}

inline std::vector<Proposal> run_pipeline(const DensePredictions& preds,
                                          ScoringMode mode,
                                          const PipelineParams& params) {
  const ScoreMaps scores = score_map(preds, mode);
  std::vector<Proposal> props =
      select_pre_nms(preds, scores, params.pre_nms_k, params.pre_nms_threshold,
                     params.image_width, params.image_height);
  const bool per_class =
      params.per_class_nms.value_or(scoring_mode_uses_classes(mode));
  props = nms(std::move(props), params.nms_iou, per_class);
  return select_post_nms(std::move(props), params.post_nms_n,
                         params.post_nms_threshold);
}

}  // namespace owp
