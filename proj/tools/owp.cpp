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
//
// Command-line front end. Subcommands wire the library into file-to-file
// pipelines: synth -> score -> eval, plus the diagnostic commands assign,
// sample-stats, mask-stats, and hist. Human-readable reports go to stdout,
// machine-readable files to disk. Exit codes: 0 success, 2 input/usage
// error, 1 internal error.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "owp/owp.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct ConfigFlag {
  std::string path;
  std::vector<std::string> warnings;

  owp::Config load() {
    owp::Config cfg;
    if (!path.empty()) cfg = owp::load_config(path, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return cfg;
  }
};

int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Run fn(i) for i in [0, count) on a bounded pool; rethrows the first error.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

owp::PipelineParams pipeline_params_from(const owp::Config& cfg) {
  owp::PipelineParams p;
  p.pre_nms_k = cfg.pre_nms_k;
  p.pre_nms_threshold = cfg.pre_nms_threshold;
  p.nms_iou = cfg.nms_iou;
  p.post_nms_n = cfg.post_nms_n;
  p.post_nms_threshold = cfg.post_nms_threshold;
  p.per_class_nms = cfg.per_class_nms;
  return p;
}

// Build the grids implied by a prediction file, with an all-background
// assignment; used when no ground truth is supplied.
owp::AssignmentResult empty_assignment_for(const owp::DensePredictions& preds) {
  owp::AssignmentResult result;
  for (std::size_t k = 0; k < preds.levels.size(); ++k) {
    owp::LevelAssignment lv;
    lv.grid.level = static_cast<int>(k);
    lv.grid.stride = preds.levels[k].stride;
    lv.grid.height = preds.levels[k].height;
    lv.grid.width = preds.levels[k].width;
    const std::size_t n = lv.grid.location_count();
    lv.matched_gt.assign(n, -1);
    lv.regression_target.assign(n, owp::Ltrb{});
    lv.centerness_target.assign(n, 0.0);
    lv.center_sampled.assign(n, 0);
    result.levels.push_back(std::move(lv));
  }
  return result;
}

std::vector<owp::DenseMap> objectness_source(const owp::DensePredictions& preds,
                                             const std::string& source) {
  owp::ScoringMode mode;
  if (source == "iou") {
    mode = owp::ScoringMode::kIou;
  } else if (source == "centerness") {
    mode = owp::ScoringMode::kCenterness;
  } else if (source == "geomean") {
    mode = owp::ScoringMode::kGeomean;
  } else {
    throw std::invalid_argument("unknown objectness source '" + source +
                                "' (expected iou, centerness, geomean)");
  }
  return owp::score_map(preds, mode).score;
}

// preds_<id>.owpd files in a directory, ordered by image id.
std::vector<std::pair<int, std::string>> list_prediction_files(const std::string& dir) {
  std::vector<std::pair<int, std::string>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("preds_", 0) != 0 || entry.path().extension() != ".owpd") continue;
    try {
      const int id = std::stoi(name.substr(6, name.size() - 6 - 5));
      files.emplace_back(id, entry.path().string());
    } catch (const std::exception&) {
      // not one of ours
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw std::runtime_error(dir + ": no preds_<id>.owpd files found");
  }
  return files;
}

std::string format_ratio(double r) {
  if (std::isinf(r)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", r);
  return buf;
}

// ---------------------------------------------------------------------------
// assign

struct AssignArgs {
  std::string annotations;
  ConfigFlag config;
  int image_id = 0;
  std::string out;
};

int cmd_assign(const AssignArgs& args) {
  const owp::Config cfg = ConfigFlag(args.config).load();
  const owp::AnnotationSet set = owp::load_annotations(args.annotations);
  const owp::ImageInfo* image = set.find_image(args.image_id);
  if (image == nullptr) {
    throw std::runtime_error("image id " + std::to_string(args.image_id) +
                             " not present in " + args.annotations);
  }
  const auto levels = cfg.levels();
  const auto grids = owp::make_location_grids(image->height, image->width, levels);
  const auto boxes = set.boxes_for_image(args.image_id);
  const auto assignment = owp::assign_targets(boxes, levels, grids, cfg.center_radius);

  // Encode targets in the fixed OWPD map order: the single classification
  // channel is the foreground flag and the iou slot carries the
  // center-sampled flag.
  owp::DensePredictions out;
  for (std::size_t k = 0; k < assignment.levels.size(); ++k) {
    const auto& lv = assignment.levels[k];
    owp::LevelPredictions lp = owp::make_level_predictions(
        lv.grid.stride, lv.grid.height, lv.grid.width, 1);
    for (int i = 0; i < lv.grid.height; ++i) {
      for (int j = 0; j < lv.grid.width; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * lv.grid.width + j;
        if (lv.is_foreground(idx)) {
          lp.classification[idx] = 1.0f;
          lp.set_regression(i, j, lv.regression_target[idx]);
          lp.centerness[idx] = static_cast<float>(lv.centerness_target[idx]);
          lp.iou[idx] = lv.center_sampled[idx] ? 1.0f : 0.0f;
        }
      }
    }
    out.levels.push_back(std::move(lp));
  }
  owp::write_dense_maps(args.out, out);

  const std::size_t fg = assignment.foreground_count();
  std::cout << "foreground " << fg << "\n";
  std::cout << "background " << (assignment.location_count() - fg) << "\n";
  std::cout << "center_sampled " << assignment.center_sampled_count() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  std::string preds;
  ConfigFlag config;
  std::string mode;
  std::string out;
  std::string annotations;
  int image_id = 0;
  int jobs = default_jobs();
  std::optional<int> pre_nms_k;
  std::optional<double> pre_nms_threshold;
  std::optional<double> nms_iou;
  std::optional<int> post_nms_n;
  std::optional<double> post_nms_threshold;
};

int cmd_score(const ScoreArgs& args) {
  owp::Config cfg = ConfigFlag(args.config).load();
  const owp::ScoringMode mode =
      owp::parse_scoring_mode(args.mode.empty() ? cfg.scoring_mode : args.mode);
  owp::PipelineParams params = pipeline_params_from(cfg);
  if (args.pre_nms_k) params.pre_nms_k = *args.pre_nms_k;
  if (args.pre_nms_threshold) params.pre_nms_threshold = *args.pre_nms_threshold;
  if (args.nms_iou) params.nms_iou = *args.nms_iou;
  if (args.post_nms_n) params.post_nms_n = *args.post_nms_n;
  if (args.post_nms_threshold) params.post_nms_threshold = *args.post_nms_threshold;

  std::optional<owp::AnnotationSet> annotations;
  std::vector<int> category_ids;
  if (!args.annotations.empty()) {
    annotations = owp::load_annotations(args.annotations);
    category_ids = annotations->sorted_category_ids();
  }

  std::vector<std::pair<int, std::string>> files;
  if (fs::is_directory(args.preds)) {
    files = list_prediction_files(args.preds);
  } else {
    files.emplace_back(args.image_id, args.preds);
  }

  std::vector<std::vector<owp::Detection>> per_file(files.size());
  parallel_for(files.size(), args.jobs, [&](std::size_t i) {
    const auto& [image_id, path] = files[i];
    const owp::DensePredictions preds = owp::read_dense_maps(path);
    owp::validate_predictions(preds);
    owp::PipelineParams local = params;
    if (annotations.has_value()) {
      const owp::ImageInfo* info = annotations->find_image(image_id);
      if (info != nullptr) {
        local.image_width = info->width;
        local.image_height = info->height;
      }
    }
    const auto props = owp::run_pipeline(preds, mode, local);
    std::vector<owp::Detection>& dets = per_file[i];
    dets.reserve(props.size());
    for (const auto& p : props) {
      owp::Detection d;
      d.image_id = image_id;
      d.box = p.box;
      d.score = p.score;
      if (p.class_id.has_value()) {
        const std::size_t channel = static_cast<std::size_t>(*p.class_id);
        d.category_id = channel < category_ids.size()
                            ? category_ids[channel]
                            : *p.class_id;
      }
      dets.push_back(d);
    }
  });

  std::vector<owp::Detection> all;
  std::size_t total = 0;
  for (const auto& dets : per_file) total += dets.size();
  all.reserve(total);
  for (const auto& dets : per_file) all.insert(all.end(), dets.begin(), dets.end());
  owp::write_proposals(args.out, all);

  std::cout << "images " << files.size() << "\n";
  std::cout << "proposals " << all.size() << "\n";
  std::cout << "mode " << owp::scoring_mode_name(mode) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string gt;
  std::string proposals;
  std::string split = "coco-voc";
  std::string task = "novel-recall";
  std::vector<int> ar_ns;
  std::string out;
};

int cmd_eval(const EvalArgs& args) {
  const owp::AnnotationSet gt = owp::load_annotations(args.gt);
  const std::vector<owp::Detection> detections = owp::read_proposals(args.proposals);

  owp::ClassSplit split;
  std::vector<std::string> warnings;
  if (args.split == "coco-voc") {
    split = owp::build_split(gt.categories, owp::SplitRule::kCocoVoc, &warnings);
  } else if (args.split == "lvis") {
    split = owp::build_split(gt.categories, owp::SplitRule::kLvisFrequency, &warnings);
  } else if (args.split.rfind("file:", 0) == 0) {
    split = owp::load_split(args.split.substr(5));
  } else {
    throw std::invalid_argument("unknown split '" + args.split +
                                "' (expected coco-voc, lvis, file:PATH)");
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  owp::EvalTask task;
  if (args.task == "novel-recall") {
    task = owp::EvalTask::kNovelRecall;
  } else if (args.task == "base-precision") {
    task = owp::EvalTask::kBasePrecision;
  } else {
    throw std::invalid_argument("unknown task '" + args.task +
                                "' (expected novel-recall, base-precision)");
  }
  const owp::AnnotationSet filtered = owp::filter_annotations(gt, split, task);
  std::vector<owp::GtInstance> instances;
  for (const auto& a : filtered.annotations) {
    instances.push_back(owp::GtInstance{a.image_id, a.box, a.category_id});
  }

  owp::EvalReport report;
  report.image_count = gt.images.size();
  report.proposal_count = detections.size();
  std::map<int, std::size_t> per_image;
  for (const auto& im : gt.images) per_image[im.id] = 0;
  for (const auto& d : detections) {
    auto it = per_image.find(d.image_id);
    if (it != per_image.end()) ++it->second;
  }
  if (!per_image.empty()) {
    std::size_t lo = std::numeric_limits<std::size_t>::max(), hi = 0, sum = 0;
    for (const auto& [id, n] : per_image) {
      lo = std::min(lo, n);
      hi = std::max(hi, n);
      sum += n;
    }
    report.proposals_per_image_min = lo;
    report.proposals_per_image_max = hi;
    report.proposals_per_image_mean =
        static_cast<double>(sum) / static_cast<double>(per_image.size());
  }

  std::vector<int> ar_ns = args.ar_ns;
  if (ar_ns.empty()) ar_ns = {10, 100};
  for (int n : ar_ns) {
    report.ar[n] = owp::average_recall(detections, instances, n);
  }
  if (task == owp::EvalTask::kBasePrecision) {
    const owp::ApResult ap = owp::average_precision(detections, instances);
    report.ap = ap.ap;
    report.per_category_ap = ap.per_category;
  }

  std::cout << "seen " << split.seen_ids.size() << "\n";
  std::cout << "novel " << split.novel_ids.size() << "\n";
  std::cout << owp::report_to_text(report);

  owp::json summary;
  summary["seen"] = split.seen_ids.size();
  summary["novel"] = split.novel_ids.size();
  summary["task"] = args.task;
  for (const auto& [n, v] : report.ar) {
    if (v.has_value()) {
      summary["ar"][std::to_string(n)] = *v;
    } else {
      summary["ar"][std::to_string(n)] = nullptr;
    }
  }
  if (report.ap.has_value()) {
    summary["ap"] = *report.ap;
  } else {
    summary["ap"] = nullptr;
  }
  for (const auto& pc : report.per_category_ap) {
    summary["per_category_ap"][std::to_string(pc.category_id)] = pc.ap;
  }
  summary["images"] = report.image_count;
  summary["proposals"] = report.proposal_count;
  const std::string out_path =
      args.out.empty() ? args.proposals + ".eval.json" : args.out;
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw std::runtime_error(out_path + ": cannot open for writing");
  out << summary.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string annotations;
  int random_images = 0;
  int min_boxes = 3;
  int max_boxes = 10;
  int canvas_w = 640;
  int canvas_h = 640;
  int categories = 1;
  double noise = 0.0;
  double objectness_noise = 0.0;
  double confidence = 0.9;
  double bg_level = 0.05;
  std::uint64_t seed = 0;
  std::string out;
  ConfigFlag config;
  int jobs = default_jobs();
};

int cmd_synth(const SynthArgs& args) {
  if (args.annotations.empty() == (args.random_images == 0)) {
    throw std::invalid_argument("exactly one of --annotations or --random is required");
  }
  const owp::Config cfg = ConfigFlag(args.config).load();
  owp::AnnotationSet set;
  if (!args.annotations.empty()) {
    set = owp::load_annotations(args.annotations);
  } else {
    owp::RandomAnnotationParams p;
    p.num_images = args.random_images;
    p.min_boxes = args.min_boxes;
    p.max_boxes = args.max_boxes;
    p.canvas_width = args.canvas_w;
    p.canvas_height = args.canvas_h;
    p.num_categories = args.categories;
    p.seed = args.seed;
    p.config = cfg;
    set = owp::random_annotations(p);
  }

  owp::NoiseSpec noise;
  noise.regression_sigma = args.noise;
  noise.objectness_noise = args.objectness_noise;
  noise.classification_confidence = args.confidence;
  noise.background_score_level = args.bg_level;
  noise.seed = args.seed;
  noise.validate();

  fs::create_directories(args.out);

  // Persist the annotations beside the maps so the directory is
  // self-contained for score/eval.
  {
    owp::json j;
    j["images"] = owp::json::array();
    for (const auto& im : set.images) {
      j["images"].push_back({{"id", im.id},
                             {"width", im.width},
                             {"height", im.height},
                             {"file_name", im.file_name}});
    }
    j["annotations"] = owp::json::array();
    for (const auto& a : set.annotations) {
      j["annotations"].push_back(
          {{"id", a.id},
           {"image_id", a.image_id},
           {"category_id", a.category_id},
           {"bbox", {a.box.x1, a.box.y1, a.box.width(), a.box.height()}}});
    }
    j["categories"] = owp::json::array();
    for (const auto& c : set.categories) {
      owp::json rec = {{"id", c.id}, {"name", c.name}};
      if (c.frequency.has_value()) rec["frequency"] = *c.frequency;
      j["categories"].push_back(rec);
    }
    std::ofstream f((fs::path(args.out) / "annotations.json").string(),
                    std::ios::trunc);
    if (!f) throw std::runtime_error(args.out + ": cannot write annotations.json");
    f << j.dump() << "\n";
  }

  const std::vector<int> ids = set.sorted_image_ids();
  parallel_for(ids.size(), args.jobs, [&](std::size_t i) {
    const owp::DensePredictions preds =
        owp::synthesize_predictions(set, ids[i], cfg, noise);
    const std::string path =
        (fs::path(args.out) / ("preds_" + std::to_string(ids[i]) + ".owpd")).string();
    owp::write_dense_maps(path, preds);
  });

  std::cout << "images " << ids.size() << "\n";
  std::cout << "annotations " << set.annotations.size() << "\n";
  std::cout << "out " << args.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// hist

struct HistArgs {
  std::string proposals;
  int bins = 20;
};

int cmd_hist(const HistArgs& args) {
  const auto detections = owp::read_proposals(args.proposals);
  std::vector<double> scores;
  scores.reserve(detections.size());
  for (const auto& d : detections) scores.push_back(d.score);
  const owp::Histogram h = owp::score_histogram(scores, args.bins);
  std::cout << "bin_lo,bin_hi,count\n";
  for (int b = 0; b < h.bins; ++b) {
    std::printf("%.4f,%.4f,%zu\n", h.bin_lo(b), h.bin_hi(b), h.counts[b]);
  }
  std::cout << "samples " << scores.size() << "\n";
  std::cout << "skewness "
            << (h.skewness.has_value() ? format_ratio(*h.skewness) : "absent")
            << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sample-stats

struct SampleStatsArgs {
  std::string annotations;
  ConfigFlag config;
  int image_id = 0;
  std::string preds;
  std::string mode;
  double positive_cut = 0.5;
};

int cmd_sample_stats(const SampleStatsArgs& args) {
  const owp::Config cfg = ConfigFlag(args.config).load();
  const owp::SamplingMode mode =
      owp::parse_sampling_mode(args.mode.empty() ? cfg.sampling_mode : args.mode);
  const owp::AnnotationSet set = owp::load_annotations(args.annotations);
  const owp::ImageInfo* image = set.find_image(args.image_id);
  if (image == nullptr) {
    throw std::runtime_error("image id " + std::to_string(args.image_id) +
                             " not present in " + args.annotations);
  }
  const auto levels = cfg.levels();
  const auto grids = owp::make_location_grids(image->height, image->width, levels);
  const auto assignment = owp::assign_targets(set.boxes_for_image(args.image_id),
                                              levels, grids, cfg.center_radius);

  owp::DensePredictions preds;
  if (!args.preds.empty()) {
    preds = owp::read_dense_maps(args.preds);
    owp::validate_predictions(preds);
  } else {
    // no predictions: use the targets themselves (perfect regression)
    for (const auto& lv : assignment.levels) {
      owp::LevelPredictions lp = owp::make_level_predictions(
          lv.grid.stride, lv.grid.height, lv.grid.width, 0);
      for (int i = 0; i < lv.grid.height; ++i) {
        for (int j = 0; j < lv.grid.width; ++j) {
          const std::size_t idx = static_cast<std::size_t>(i) * lv.grid.width + j;
          lp.set_regression(i, j, lv.is_foreground(idx)
                                      ? lv.regression_target[idx]
                                      : owp::Ltrb{1, 1, 1, 1});
        }
      }
      preds.levels.push_back(std::move(lp));
    }
  }
  const auto iou_targets = owp::compute_iou_targets(assignment, preds);
  const auto training_set = owp::build_objectness_training_set(
      assignment, iou_targets, mode, cfg.iou_sampling_threshold);
  const auto stats = owp::sample_balance_stats(training_set, args.positive_cut);

  std::cout << "mode " << owp::sampling_mode_name(mode) << "\n";
  std::cout << "samples " << training_set.samples.size() << "\n";
  std::cout << "foreground " << training_set.foreground_samples << "\n";
  std::cout << "background " << training_set.background_samples << "\n";
  std::cout << "positives " << stats.positives << "\n";
  std::cout << "negatives " << stats.negatives << "\n";
  std::cout << "ratio " << format_ratio(stats.ratio) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// mask-stats

struct MaskStatsArgs {
  std::string preds;
  double threshold = 0.95;
  std::string variant = "pixel";
  std::string source;
  std::string annotations;
  int image_id = 0;
  ConfigFlag config;
};

int cmd_mask_stats(const MaskStatsArgs& args) {
  const owp::Config cfg = ConfigFlag(args.config).load();
  const owp::DensePredictions preds = owp::read_dense_maps(args.preds);
  owp::validate_predictions(preds);

  owp::AssignmentResult assignment;
  if (!args.annotations.empty()) {
    const owp::AnnotationSet set = owp::load_annotations(args.annotations);
    const owp::ImageInfo* image = set.find_image(args.image_id);
    if (image == nullptr) {
      throw std::runtime_error("image id " + std::to_string(args.image_id) +
                               " not present in " + args.annotations);
    }
    const auto levels = cfg.levels();
    const auto grids = owp::make_location_grids(image->height, image->width, levels);
    assignment = owp::assign_targets(set.boxes_for_image(args.image_id), levels,
                                     grids, cfg.center_radius);
  } else {
    assignment = empty_assignment_for(preds);
  }

  const auto objectness = objectness_source(
      preds, args.source.empty() ? cfg.mask_objectness : args.source);

  owp::BackgroundMask mask;
  if (args.variant == "pixel") {
    mask = owp::unknown_object_mask(objectness, assignment, args.threshold);
  } else if (args.variant == "area") {
    mask = owp::unknown_area_mask(objectness, preds, assignment, args.threshold,
                                  cfg.area_mask_trigger_nms, cfg.nms_iou);
  } else {
    throw std::invalid_argument("unknown variant '" + args.variant +
                                "' (expected pixel, area)");
  }

  const std::size_t fg = assignment.foreground_count();
  std::cout << "variant " << args.variant << "\n";
  std::cout << "threshold " << args.threshold << "\n";
  std::cout << "excluded " << mask.excluded_count() << "\n";
  std::cout << "foreground " << fg << "\n";
  std::cout << "locations " << assignment.location_count() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-world proposal toolkit: dense assignment, objectness "
               "sampling, proposal scoring/NMS, open-world evaluation, and a "
               "seeded synthetic detector."};
  app.require_subcommand(1);

  AssignArgs assign_args;
  auto* assign = app.add_subcommand("assign", "Write assignment targets as an OWPD file");
  assign->add_option("--annotations", assign_args.annotations, "COCO-style annotation JSON")
      ->required();
  assign->add_option("--config", assign_args.config.path, "Config JSON");
  assign->add_option("--image-id", assign_args.image_id, "Image to assign")->required();
  assign->add_option("--out", assign_args.out, "Output OWPD path")->required();

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Run the proposal pipeline over prediction maps");
  score->add_option("--preds", score_args.preds,
                    "OWPD file or directory of preds_<id>.owpd files")
      ->required();
  score->add_option("--config", score_args.config.path, "Config JSON");
  score->add_option("--mode", score_args.mode,
                    "centerness|iou|geomean|logits-centerness|logits-iou");
  score->add_option("--out", score_args.out, "Output proposals JSON")->required();
  score->add_option("--annotations", score_args.annotations,
                    "Annotation JSON for image sizes and category ids");
  score->add_option("--image-id", score_args.image_id,
                    "Image id when --preds is a single file");
  score->add_option("--jobs", score_args.jobs, "Worker pool size");
  score->add_option("--pre-nms-k", score_args.pre_nms_k, "Pre-NMS keep count");
  score->add_option("--pre-nms-threshold", score_args.pre_nms_threshold,
                    "Pre-NMS score floor");
  score->add_option("--nms-iou", score_args.nms_iou, "NMS IOU threshold");
  score->add_option("--post-nms-n", score_args.post_nms_n, "Post-NMS keep count");
  score->add_option("--post-nms-threshold", score_args.post_nms_threshold,
                    "Post-NMS score floor");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Open-world recall/precision evaluation");
  eval->add_option("--gt", eval_args.gt, "Ground-truth annotation JSON")->required();
  eval->add_option("--proposals", eval_args.proposals, "Proposals JSON")->required();
  eval->add_option("--split", eval_args.split, "coco-voc|lvis|file:PATH");
  eval->add_option("--task", eval_args.task, "novel-recall|base-precision");
  eval->add_option("--ar-n", eval_args.ar_ns, "Proposal budget N for AR@N (repeatable)");
  eval->add_option("--out", eval_args.out,
                   "Machine-readable summary path (default: <proposals>.eval.json)");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Fabricate seeded prediction maps");
  synth->add_option("--annotations", synth_args.annotations,
                    "Use this annotation file instead of random boxes");
  synth->add_option("--random", synth_args.random_images,
                    "Generate this many random images");
  synth->add_option("--min-boxes", synth_args.min_boxes, "Random boxes per image, lower bound");
  synth->add_option("--max-boxes", synth_args.max_boxes, "Random boxes per image, upper bound");
  synth->add_option("--canvas-width", synth_args.canvas_w, "Random canvas width");
  synth->add_option("--canvas-height", synth_args.canvas_h, "Random canvas height");
  synth->add_option("--categories", synth_args.categories, "Random category count");
  synth->add_option("--noise", synth_args.noise, "Regression sigma (fraction of box size)");
  synth->add_option("--objectness-noise", synth_args.objectness_noise,
                    "Additive objectness sigma");
  synth->add_option("--confidence", synth_args.confidence,
                    "Classification confidence at the true class");
  synth->add_option("--bg-level", synth_args.bg_level, "Background score ceiling");
  synth->add_option("--seed", synth_args.seed, "RNG seed");
  synth->add_option("--out", synth_args.out, "Output directory")->required();
  synth->add_option("--config", synth_args.config.path, "Config JSON");
  synth->add_option("--jobs", synth_args.jobs, "Worker pool size");

  HistArgs hist_args;
  auto* hist = app.add_subcommand("hist", "Score histogram and skewness of a proposal file");
  hist->add_option("--proposals", hist_args.proposals, "Proposals JSON")->required();
  hist->add_option("--bins", hist_args.bins, "Histogram bins");

  SampleStatsArgs sample_args;
  auto* sample = app.add_subcommand("sample-stats",
                                    "Objectness training-set balance statistics");
  sample->add_option("--annotations", sample_args.annotations, "Annotation JSON")->required();
  sample->add_option("--config", sample_args.config.path, "Config JSON");
  sample->add_option("--image-id", sample_args.image_id, "Image id")->required();
  sample->add_option("--preds", sample_args.preds,
                     "OWPD predictions; omitted means perfect regression");
  sample->add_option("--mode", sample_args.mode, "fcos_default|cs_is|all");
  sample->add_option("--positive-cut", sample_args.positive_cut,
                     "Positive/negative target cut");

  MaskStatsArgs mask_args;
  auto* mask = app.add_subcommand("mask-stats", "Unknown-object masking statistics");
  mask->add_option("--preds", mask_args.preds, "OWPD predictions")->required();
  mask->add_option("--threshold", mask_args.threshold, "Objectness threshold");
  mask->add_option("--variant", mask_args.variant, "pixel|area");
  mask->add_option("--source", mask_args.source, "iou|centerness|geomean");
  mask->add_option("--annotations", mask_args.annotations,
                   "Annotation JSON marking foreground");
  mask->add_option("--image-id", mask_args.image_id, "Image id for --annotations");
  mask->add_option("--config", mask_args.config.path, "Config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*assign) return cmd_assign(assign_args);
    if (*score) return cmd_score(score_args);
    if (*eval) return cmd_eval(eval_args);
    if (*synth) return cmd_synth(synth_args);
    if (*hist) return cmd_hist(hist_args);
    if (*sample) return cmd_sample_stats(sample_args);
    if (*mask) return cmd_mask_stats(mask_args);
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
