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
#include <atomic>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "owp/annotations.hpp"
#include "owp/assignment.hpp"
#include "owp/config.hpp"
#include "owp/eval.hpp"
#include "owp/pipeline.hpp"
#include "owp/predictions.hpp"
#include "owp/rng.hpp"

namespace owp {

/// Noise model of the synthetic detector. Regression noise is
/// multiplicative (a fraction of the box extent) so small and large boxes
/// degrade comparably.
struct NoiseSpec {
  double regression_sigma = 0.0;
  double objectness_noise = 0.0;
  double classification_confidence = 0.9;
  double background_score_level = 0.05;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(regression_sigma >= 0) || !(objectness_noise >= 0)) {
      throw std::invalid_argument("noise sigmas must be non-negative");
    }
    if (!(classification_confidence > 0 && classification_confidence <= 1)) {
      throw std::invalid_argument("classification_confidence must lie in (0,1]");
    }
    if (!(background_score_level >= 0 && background_score_level < 1)) {
      throw std::invalid_argument("background_score_level must lie in [0,1)");
    }
  }
};

/// Fabricate dense prediction maps for one image from its ground truth.
///
/// Foreground locations carry the true regression perturbed per component
/// by (1 + gaussian(0, regression_sigma)), clamped to at least 1% of the
/// box extent on that axis; the IOU map is the exact LTRB-IOU of the
/// perturbed tuple against the truth plus clamped gaussian objectness
/// noise, and centerness is the true centerness target perturbed the same
/// way. Classification puts classification_confidence on the true class
/// channel (channels ordered by ascending category id) and
/// background_score_level elsewhere. Background locations draw uniform
/// scores in [0, background_score_level) and small positive regressions.
/// Deterministic: the stream is derived from (seed, image_id).
inline DensePredictions synthesize_predictions(const AnnotationSet& set,
                                               int image_id, const Config& cfg,
                                               const NoiseSpec& noise) {
  noise.validate();
  const ImageInfo* image = set.find_image(image_id);
  if (image == nullptr) {
    throw std::invalid_argument("image id " + std::to_string(image_id) +
                                " not present in the annotation set");
  }
  const auto levels = cfg.levels();
  const auto grids = make_location_grids(image->height, image->width, levels);
  const auto annotations = set.annotations_for_image(image_id);
  std::vector<BoxXYXY> boxes;
  boxes.reserve(annotations.size());
  for (const auto& a : annotations) boxes.push_back(a.box);
  const AssignmentResult assignment =
      assign_targets(boxes, levels, grids, cfg.center_radius);

  const std::vector<int> category_ids = set.sorted_category_ids();
  std::map<int, int> channel_of;
  for (std::size_t c = 0; c < category_ids.size(); ++c) {
    channel_of[category_ids[c]] = static_cast<int>(c);
  }
  const int num_classes = static_cast<int>(category_ids.size());

  CounterRng rng = CounterRng(noise.seed).substream(static_cast<std::uint64_t>(image_id));

  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };

  DensePredictions preds;
  preds.levels.reserve(levels.size());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto& lv = assignment.levels[k];
    LevelPredictions lp = make_level_predictions(levels[k].stride, lv.grid.height,
                                                 lv.grid.width, num_classes);
    for (int i = 0; i < lv.grid.height; ++i) {
      for (int j = 0; j < lv.grid.width; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * lv.grid.width + j;
        if (lv.is_foreground(idx)) {
          const Ltrb truth = lv.regression_target[idx];
          const double min_w = 0.01 * (truth.l + truth.r);
          const double min_h = 0.01 * (truth.t + truth.b);
          Ltrb pert;
          pert.l = std::max(min_w, truth.l * (1.0 + rng.gaussian(0.0, noise.regression_sigma)));
          pert.r = std::max(min_w, truth.r * (1.0 + rng.gaussian(0.0, noise.regression_sigma)));
          pert.t = std::max(min_h, truth.t * (1.0 + rng.gaussian(0.0, noise.regression_sigma)));
          pert.b = std::max(min_h, truth.b * (1.0 + rng.gaussian(0.0, noise.regression_sigma)));
          lp.set_regression(i, j, pert);
          lp.iou[idx] = static_cast<float>(clamp01(
              iou_ltrb(pert, truth) + rng.gaussian(0.0, noise.objectness_noise)));
          lp.centerness[idx] = static_cast<float>(clamp01(
              lv.centerness_target[idx] + rng.gaussian(0.0, noise.objectness_noise)));
          const int true_channel = channel_of.at(
              annotations[static_cast<std::size_t>(lv.matched_gt[idx])].category_id);
          for (int c = 0; c < num_classes; ++c) {
            lp.cls_at(i, j, c) = static_cast<float>(
                c == true_channel ? noise.classification_confidence
                                  : noise.background_score_level);
          }
        } else {
          const double s = levels[k].stride;
          Ltrb small;
          small.l = rng.uniform(0.1, 1.0) * s;
          small.r = rng.uniform(0.1, 1.0) * s;
          small.t = rng.uniform(0.1, 1.0) * s;
          small.b = rng.uniform(0.1, 1.0) * s;
          lp.set_regression(i, j, small);
          lp.iou[idx] = static_cast<float>(rng.uniform(0.0, noise.background_score_level));
          lp.centerness[idx] = static_cast<float>(rng.uniform(0.0, noise.background_score_level));
          for (int c = 0; c < num_classes; ++c) {
            lp.cls_at(i, j, c) = static_cast<float>(
                rng.uniform(0.0, noise.background_score_level));
          }
        }
      }
    }
    preds.levels.push_back(std::move(lp));
  }
  return preds;
}

// ---------------------------------------------------------------------------
// Synthetic annotation sets

struct RandomAnnotationParams {
  int num_images = 10;
  int min_boxes = 3;
  int max_boxes = 10;
  int canvas_width = 640;
  int canvas_height = 640;
  int min_box_size = 24;
  int max_box_size = 120;
  int num_categories = 1;
  double max_pairwise_iou = 0.3;
  std::uint64_t seed = 0;
  // Boxes that end up with no assigned location under this config are
  // dropped, so every kept box is recoverable by a perfect detector.
  Config config;
};

/// Random integer-coordinate boxes on a virtual canvas. Integer corners
/// survive the 32-bit map storage exactly, so zero-noise synthesis decodes
/// back to the ground truth bit for bit. Pairwise IOU within an image is
/// capped (rejection sampling) to keep distinct objects from suppressing
/// each other under NMS. Category names are synthetic non-VOC names, so the
/// coco-voc split rule sends every category to the novel side.
inline AnnotationSet random_annotations(const RandomAnnotationParams& p) {
  if (p.num_images <= 0 || p.min_boxes < 0 || p.max_boxes < p.min_boxes) {
    throw std::invalid_argument("random_annotations: bad image/box counts");
  }
  if (p.min_box_size < 4 || p.max_box_size < p.min_box_size ||
      p.max_box_size >= std::min(p.canvas_width, p.canvas_height)) {
    throw std::invalid_argument("random_annotations: bad box size bounds");
  }
  const auto levels = p.config.levels();

  AnnotationSet set;
  for (int c = 0; c < p.num_categories; ++c) {
    set.categories.push_back(Category{c + 1, "object" + std::to_string(c + 1), {}});
  }
  CounterRng root(p.seed);
  int next_annotation_id = 1;
  for (int im = 1; im <= p.num_images; ++im) {
    set.images.push_back(ImageInfo{im, p.canvas_width, p.canvas_height,
                                   "synthetic_" + std::to_string(im) + ".png"});
    CounterRng rng = root.substream(static_cast<std::uint64_t>(im));
    const int want = p.min_boxes +
                     static_cast<int>(rng.next_below(
                         static_cast<std::uint64_t>(p.max_boxes - p.min_boxes + 1)));
    std::vector<BoxXYXY> boxes;
    int attempts = 0;
    while (static_cast<int>(boxes.size()) < want && attempts < 200 * want) {
      ++attempts;
      const int w = p.min_box_size +
                    static_cast<int>(rng.next_below(
                        static_cast<std::uint64_t>(p.max_box_size - p.min_box_size + 1)));
      const int h = p.min_box_size +
                    static_cast<int>(rng.next_below(
                        static_cast<std::uint64_t>(p.max_box_size - p.min_box_size + 1)));
      const int x1 = static_cast<int>(rng.next_below(
          static_cast<std::uint64_t>(p.canvas_width - w + 1)));
      const int y1 = static_cast<int>(rng.next_below(
          static_cast<std::uint64_t>(p.canvas_height - h + 1)));
      BoxXYXY candidate{static_cast<double>(x1), static_cast<double>(y1),
                        static_cast<double>(x1 + w), static_cast<double>(y1 + h)};
      bool ok = true;
      for (const auto& b : boxes) {
        if (iou_xyxy(candidate, b) > p.max_pairwise_iou) {
          ok = false;
          break;
        }
      }
      if (ok) boxes.push_back(candidate);
    }

    // Keep only boxes a perfect detector can return: at least one assigned
    // location under the configured pyramid.
    const auto grids = make_location_grids(p.canvas_height, p.canvas_width, levels);
    const auto assignment =
        assign_targets(boxes, levels, grids, p.config.center_radius);
    std::vector<bool> has_location(boxes.size(), false);
    for (const auto& lv : assignment.levels) {
      for (auto m : lv.matched_gt) {
        if (m >= 0) has_location[static_cast<std::size_t>(m)] = true;
      }
    }
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      if (!has_location[b]) continue;
      Annotation a;
      a.id = next_annotation_id++;
      a.image_id = im;
      a.category_id = 1 + static_cast<int>(rng.next_below(
                              static_cast<std::uint64_t>(p.num_categories)));
      a.box = boxes[b];
      a.box.category_id = a.category_id;
      set.annotations.push_back(a);
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// Scenario driver

struct ScenarioParams {
  std::vector<ScoringMode> modes{ScoringMode::kIou};
  std::vector<int> ar_ns{10, 100};
  int jobs = 1;
};

struct ScenarioOutput {
  ScoringMode mode;
  EvalReport report;
  // Proposals per image in image-id order, category channels already
  // remapped to category ids.
  std::vector<std::pair<int, std::vector<Proposal>>> proposals;
};

/// Synthesize predictions for every image, run the proposal pipeline per
/// scoring mode, and evaluate. Recall is measured against novel-class
/// annotations when a split is given (all annotations otherwise); AP is
/// only computed for modes that produce class ids, against the seen side.
/// Images are processed by a worker pool; results are deterministic and
/// ordered by image id regardless of the job count.
inline std::vector<ScenarioOutput> run_scenario(
    const AnnotationSet& set, const std::optional<ClassSplit>& split,
    const Config& cfg, const NoiseSpec& noise, const ScenarioParams& params) {
  noise.validate();
  if (params.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  const std::vector<int> image_ids = set.sorted_image_ids();
  const std::vector<int> category_ids = set.sorted_category_ids();

  std::vector<std::vector<std::vector<Proposal>>> per_mode_proposals(
      params.modes.size(),
      std::vector<std::vector<Proposal>>(image_ids.size()));

  PipelineParams pipeline_params;
  pipeline_params.pre_nms_k = cfg.pre_nms_k;
  pipeline_params.pre_nms_threshold = cfg.pre_nms_threshold;
  pipeline_params.nms_iou = cfg.nms_iou;
  pipeline_params.post_nms_n = cfg.post_nms_n;
  pipeline_params.post_nms_threshold = cfg.post_nms_threshold;
  pipeline_params.per_class_nms = cfg.per_class_nms;

  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = cursor.fetch_add(1);
      if (idx >= image_ids.size()) return;
      try {
        const int image_id = image_ids[idx];
        const ImageInfo* info = set.find_image(image_id);
        PipelineParams pp = pipeline_params;
        pp.image_width = info->width;
        pp.image_height = info->height;
        const DensePredictions preds =
            synthesize_predictions(set, image_id, cfg, noise);
        for (std::size_t m = 0; m < params.modes.size(); ++m) {
          auto props = run_pipeline(preds, params.modes[m], pp);
          for (auto& p : props) {
            if (p.class_id.has_value()) {
              p.class_id = category_ids[static_cast<std::size_t>(*p.class_id)];
            }
          }
          per_mode_proposals[m][idx] = std::move(props);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (params.jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(params.jobs,
                                        static_cast<int>(image_ids.size()) > 0
                                            ? static_cast<int>(image_ids.size())
                                            : 1);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  AnnotationSet recall_gt = set;
  AnnotationSet precision_gt = set;
  if (split.has_value()) {
    recall_gt = filter_annotations(set, *split, EvalTask::kNovelRecall);
    precision_gt = filter_annotations(set, *split, EvalTask::kBasePrecision);
  }
  auto to_instances = [](const AnnotationSet& s) {
    std::vector<GtInstance> out;
    out.reserve(s.annotations.size());
    for (const auto& a : s.annotations) {
      out.push_back(GtInstance{a.image_id, a.box, a.category_id});
    }
    return out;
  };
  const std::vector<GtInstance> recall_instances = to_instances(recall_gt);
  const std::vector<GtInstance> precision_instances = to_instances(precision_gt);

  std::vector<ScenarioOutput> outputs;
  outputs.reserve(params.modes.size());
  for (std::size_t m = 0; m < params.modes.size(); ++m) {
    ScenarioOutput out;
    out.mode = params.modes[m];

    std::vector<Detection> detections;
    std::size_t min_count = std::numeric_limits<std::size_t>::max();
    std::size_t max_count = 0;
    for (std::size_t idx = 0; idx < image_ids.size(); ++idx) {
      const auto& props = per_mode_proposals[m][idx];
      min_count = std::min(min_count, props.size());
      max_count = std::max(max_count, props.size());
      for (const auto& p : props) {
        detections.push_back(Detection{image_ids[idx], p.box, p.score, p.class_id});
      }
      out.proposals.emplace_back(image_ids[idx], props);
    }
    if (image_ids.empty()) min_count = 0;

    EvalReport report;
    report.image_count = image_ids.size();
    report.proposal_count = detections.size();
    report.proposals_per_image_mean =
        image_ids.empty() ? 0.0
                          : static_cast<double>(detections.size()) / image_ids.size();
    report.proposals_per_image_min = min_count;
    report.proposals_per_image_max = max_count;
    for (int n : params.ar_ns) {
      report.ar[n] = average_recall(detections, recall_instances, n);
    }
    if (scoring_mode_uses_classes(params.modes[m])) {
      const ApResult ap = average_precision(detections, precision_instances);
      report.ap = ap.ap;
      report.per_category_ap = ap.per_category;
    }
    outputs.push_back(std::move(out));
    outputs.back().report = std::move(report);
  }
  return outputs;
}

}  // namespace owp
