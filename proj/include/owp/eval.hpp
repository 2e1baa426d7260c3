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
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "owp/annotations.hpp"
#include "owp/geometry.hpp"

namespace owp {

// ---------------------------------------------------------------------------
// Class splits

struct ClassSplit {
  std::set<int> seen_ids;
  std::set<int> novel_ids;
};

enum class SplitRule { kCocoVoc, kLvisFrequency };

enum class EvalTask { kNovelRecall, kBasePrecision };

namespace detail {

// PASCAL VOC class names plus their COCO spellings, normalized to lowercase
// with spaces/underscores removed.
inline const std::set<std::string>& voc_name_set() {
  static const std::set<std::string> names = {
      "aeroplane", "airplane", "bicycle", "bird", "boat", "bottle", "bus",
      "car", "cat", "chair", "cow", "diningtable", "dog", "horse",
      "motorbike", "motorcycle", "person", "pottedplant", "sheep", "sofa",
      "couch", "train", "tvmonitor", "tv"};
  return names;
}

inline std::string normalize_name(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace detail

/// Partition a taxonomy into seen (base) and novel ids.
///   kCocoVoc:        categories matching a PASCAL VOC class name are seen,
///                    everything else novel (20/60 on the COCO taxonomy).
///   kLvisFrequency:  all rare and common categories plus the first 305
///                    frequent ones (ascending id) are seen; the remaining
///                    frequent categories are novel (1103/100 on LVIS).
inline ClassSplit build_split(const std::vector<Category>& taxonomy,
                              SplitRule rule,
                              std::vector<std::string>* warnings = nullptr) {
  {
    std::set<int> ids;
    for (const auto& c : taxonomy) {
      if (!ids.insert(c.id).second) {
        throw std::invalid_argument("duplicate category id " + std::to_string(c.id));
      }
    }
  }
  ClassSplit split;
  if (rule == SplitRule::kCocoVoc) {
    for (const auto& c : taxonomy) {
      if (detail::voc_name_set().count(detail::normalize_name(c.name))) {
        split.seen_ids.insert(c.id);
      } else {
        split.novel_ids.insert(c.id);
      }
    }
    return split;
  }

  // LVIS frequency rule.
  std::size_t rare = 0, common = 0;
  std::vector<int> frequent_ids;
  for (const auto& c : taxonomy) {
    if (!c.frequency.has_value()) {
      throw std::invalid_argument("category " + std::to_string(c.id) +
                                  " lacks the frequency tag required by the "
                                  "lvis split rule");
    }
    const std::string& f = *c.frequency;
    if (f == "r") {
      ++rare;
      split.seen_ids.insert(c.id);
    } else if (f == "c") {
      ++common;
      split.seen_ids.insert(c.id);
    } else if (f == "f") {
      frequent_ids.push_back(c.id);
    } else {
      throw std::invalid_argument("category " + std::to_string(c.id) +
                                  " has unknown frequency tag '" + f + "'");
    }
  }
  if (warnings != nullptr &&
      (rare != 337 || common != 461 || frequent_ids.size() != 405)) {
    warnings->push_back(
        "lvis taxonomy has " + std::to_string(rare) + "/" +
        std::to_string(common) + "/" + std::to_string(frequent_ids.size()) +
        " rare/common/frequent categories (expected 337/461/405); applying "
        "the rule as stated");
  }
  std::sort(frequent_ids.begin(), frequent_ids.end());
  for (std::size_t i = 0; i < frequent_ids.size(); ++i) {
    if (i < 305) {
      split.seen_ids.insert(frequent_ids[i]);
    } else {
      split.novel_ids.insert(frequent_ids[i]);
    }
  }
  return split;
}

/// Keep only novel-class annotations (recall task) or only seen-class
/// annotations (precision task). Images and categories pass through.
inline AnnotationSet filter_annotations(const AnnotationSet& set,
                                        const ClassSplit& split, EvalTask task) {
  AnnotationSet out;
  out.images = set.images;
  out.categories = set.categories;
  for (const auto& a : set.annotations) {
    const bool seen = split.seen_ids.count(a.category_id) > 0;
    const bool novel = split.novel_ids.count(a.category_id) > 0;
    if (!seen && !novel) {
      throw std::invalid_argument("annotation category id " +
                                  std::to_string(a.category_id) +
                                  " is in neither side of the split");
    }
    if ((task == EvalTask::kNovelRecall && novel) ||
        (task == EvalTask::kBasePrecision && seen)) {
      out.annotations.push_back(a);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matching metrics

struct Detection {
  int image_id = 0;
  BoxXYXY box;
  double score = 0.0;
  std::optional<int> category_id;
};

struct GtInstance {
  int image_id = 0;
  BoxXYXY box;
  int category_id = 0;
};

namespace detail {

inline std::vector<double> iou_match_thresholds() {
  std::vector<double> taus;
  for (int k = 0; k < 10; ++k) taus.push_back(0.5 + 0.05 * k);
  return taus;
}

// Score-ordered greedy matching: each detection (best score first) takes the
// unmatched ground truth with the highest IOU if that IOU reaches tau.
// Returns the number of matched ground truths.
inline std::size_t greedy_match_count(const std::vector<BoxXYXY>& dets_sorted,
                                      const std::vector<BoxXYXY>& gts,
                                      const std::vector<std::vector<double>>& iou,
                                      double tau) {
  std::vector<bool> gt_taken(gts.size(), false);
  std::size_t matched = 0;
  for (std::size_t d = 0; d < dets_sorted.size(); ++d) {
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gt_taken[g]) continue;
      if (iou[d][g] > best_iou) {
        best_iou = iou[d][g];
        best = static_cast<int>(g);
      }
    }
    if (best >= 0 && best_iou >= tau) {
      gt_taken[best] = true;
      ++matched;
    }
  }
  return matched;
}

inline void sort_by_score_desc(std::vector<Detection>& dets) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.score > b.score;
                   });
}

}  // namespace detail

/// Class-agnostic average recall over the top N proposals per image,
/// averaged over IOU thresholds 0.50:0.05:0.95. Recall pools matched and
/// total ground truth across images; images without ground truth do not
/// contribute. Absent when there is no ground truth at all.
inline std::optional<double> average_recall(const std::vector<Detection>& proposals,
                                            const std::vector<GtInstance>& gt,
                                            int top_n) {
  if (top_n <= 0) throw std::invalid_argument("average_recall: N must be positive");

  std::map<int, std::vector<BoxXYXY>> gt_by_image;
  for (const auto& g : gt) gt_by_image[g.image_id].push_back(g.box);
  if (gt_by_image.empty()) return std::nullopt;

  std::map<int, std::vector<Detection>> det_by_image;
  for (const auto& d : proposals) {
    if (gt_by_image.count(d.image_id)) det_by_image[d.image_id].push_back(d);
  }

  const std::vector<double> taus = detail::iou_match_thresholds();
  std::vector<std::size_t> matched(taus.size(), 0);
  std::size_t total_gt = 0;

  for (const auto& [image_id, gts] : gt_by_image) {
    total_gt += gts.size();
    auto it = det_by_image.find(image_id);
    if (it == det_by_image.end()) continue;
    auto& dets = it->second;
    detail::sort_by_score_desc(dets);
    if (dets.size() > static_cast<std::size_t>(top_n)) dets.resize(top_n);

    std::vector<BoxXYXY> det_boxes;
    det_boxes.reserve(dets.size());
    for (const auto& d : dets) det_boxes.push_back(d.box);
    std::vector<std::vector<double>> iou(det_boxes.size(),
                                         std::vector<double>(gts.size(), 0.0));
    for (std::size_t d = 0; d < det_boxes.size(); ++d) {
      for (std::size_t g = 0; g < gts.size(); ++g) {
        iou[d][g] = iou_xyxy(det_boxes[d], gts[g]);
      }
    }
    for (std::size_t t = 0; t < taus.size(); ++t) {
      matched[t] += detail::greedy_match_count(det_boxes, gts, iou, taus[t]);
    }
  }
  if (total_gt == 0) return std::nullopt;

  double ar = 0.0;
  for (std::size_t t = 0; t < taus.size(); ++t) {
    ar += static_cast<double>(matched[t]) / static_cast<double>(total_gt);
  }
  return ar / static_cast<double>(taus.size());
}

struct PerCategoryAp {
  int category_id = 0;
  double ap = 0.0;
};

struct ApResult {
  std::optional<double> ap;
  std::vector<PerCategoryAp> per_category;
};

/// Per-category average precision: score-ordered greedy matching at IOU
/// thresholds 0.50:0.05:0.95, 101-point interpolated precision-recall
/// integration per threshold, averaged over thresholds and then over
/// categories with at least one ground truth. Detections without a
/// category id are ignored.
inline ApResult average_precision(const std::vector<Detection>& detections,
                                  const std::vector<GtInstance>& gt) {
  std::set<int> categories;
  for (const auto& g : gt) categories.insert(g.category_id);
  ApResult result;
  if (categories.empty()) return result;

  const std::vector<double> taus = detail::iou_match_thresholds();
  double ap_sum = 0.0;

  for (int cat : categories) {
    std::map<int, std::vector<BoxXYXY>> gt_by_image;
    std::size_t n_gt = 0;
    for (const auto& g : gt) {
      if (g.category_id == cat) {
        gt_by_image[g.image_id].push_back(g.box);
        ++n_gt;
      }
    }
    std::vector<Detection> dets;
    for (const auto& d : detections) {
      if (d.category_id.has_value() && *d.category_id == cat) dets.push_back(d);
    }
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection& a, const Detection& b) {
                       if (a.score != b.score) return a.score > b.score;
                       return a.image_id < b.image_id;
                     });

    double cat_ap = 0.0;
    for (double tau : taus) {
      std::map<int, std::vector<bool>> taken;
      for (const auto& [img, boxes] : gt_by_image) {
        taken[img].assign(boxes.size(), false);
      }
      std::vector<double> precision, recall;
      std::size_t tp = 0, fp = 0;
      for (const auto& d : dets) {
        auto it = gt_by_image.find(d.image_id);
        int best = -1;
        double best_iou = 0.0;
        if (it != gt_by_image.end()) {
          auto& flags = taken[d.image_id];
          for (std::size_t g = 0; g < it->second.size(); ++g) {
            if (flags[g]) continue;
            const double v = iou_xyxy(d.box, it->second[g]);
            if (v > best_iou) {
              best_iou = v;
              best = static_cast<int>(g);
            }
          }
        }
        if (best >= 0 && best_iou >= tau) {
          taken[d.image_id][best] = true;
          ++tp;
        } else {
          ++fp;
        }
        precision.push_back(static_cast<double>(tp) / (tp + fp));
        recall.push_back(static_cast<double>(tp) / n_gt);
      }
      // Precision envelope, then 101-point interpolation.
      for (std::size_t i = precision.size(); i-- > 1;) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
      }
      double sum = 0.0;
      for (int r = 0; r <= 100; ++r) {
        const double level = r / 100.0;
        auto it101 = std::lower_bound(recall.begin(), recall.end(), level);
        if (it101 != recall.end()) {
          sum += precision[static_cast<std::size_t>(it101 - recall.begin())];
        }
      }
      cat_ap += sum / 101.0;
    }
    cat_ap /= static_cast<double>(taus.size());
    result.per_category.push_back(PerCategoryAp{cat, cat_ap});
    ap_sum += cat_ap;
  }
  result.ap = ap_sum / static_cast<double>(categories.size());
  return result;
}

// ---------------------------------------------------------------------------
// Score histograms

struct Histogram {
  int bins = 0;
  std::vector<std::size_t> counts;          // equal-width bins over [0,1]
  std::optional<double> skewness;           // m3 / m2^1.5; absent under 3 samples

  double bin_lo(int b) const { return static_cast<double>(b) / bins; }
  double bin_hi(int b) const { return static_cast<double>(b + 1) / bins; }
};

inline Histogram score_histogram(const std::vector<double>& scores, int bins) {
  if (bins < 2) throw std::invalid_argument("score_histogram: bins must be >= 2");
  Histogram h;
  h.bins = bins;
  h.counts.assign(bins, 0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    if (!(s >= 0.0 && s <= 1.0)) {
      throw std::invalid_argument("score_histogram: score " + std::to_string(i) +
                                  " outside [0,1]");
    }
    const int b = std::min(bins - 1, static_cast<int>(s * bins));
    ++h.counts[b];
  }
  const std::size_t n = scores.size();
  if (n >= 3) {
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0;
    for (double s : scores) {
      const double d = s - mean;
      m2 += d * d;
      m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    if (m2 > 0.0) h.skewness = m3 / std::pow(m2, 1.5);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Report

struct EvalReport {
  std::map<int, std::optional<double>> ar;  // N -> AR@N
  std::optional<double> ap;
  std::vector<PerCategoryAp> per_category_ap;
  std::size_t image_count = 0;
  std::size_t proposal_count = 0;
  double proposals_per_image_mean = 0.0;
  std::size_t proposals_per_image_min = 0;
  std::size_t proposals_per_image_max = 0;
};

/// One `name value` line per metric.
inline std::string report_to_text(const EvalReport& r) {
  std::string out;
  auto add = [&out](const std::string& name, const std::string& value) {
    out += name;
    out += ' ';
    out += value;
    out += '\n';
  };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
  };
  for (const auto& [n, v] : r.ar) {
    add("AR" + std::to_string(n), v.has_value() ? fmt(*v) : "absent");
  }
  add("AP", r.ap.has_value() ? fmt(*r.ap) : "absent");
  for (const auto& pc : r.per_category_ap) {
    add("AP_category_" + std::to_string(pc.category_id), fmt(pc.ap));
  }
  add("images", std::to_string(r.image_count));
  add("proposals", std::to_string(r.proposal_count));
  add("proposals_per_image_mean", fmt(r.proposals_per_image_mean));
  add("proposals_per_image_min", std::to_string(r.proposals_per_image_min));
  add("proposals_per_image_max", std::to_string(r.proposals_per_image_max));
  return out;
}

}  // namespace owp
