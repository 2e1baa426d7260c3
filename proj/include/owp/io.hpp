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

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "owp/annotations.hpp"
#include "owp/config.hpp"
#include "owp/eval.hpp"
#include "owp/pipeline.hpp"
#include "owp/predictions.hpp"

namespace owp {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Annotations (COCO-style JSON)

namespace detail {

inline json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open file");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": malformed JSON: " + e.what());
  }
  return j;
}

template <typename T>
T get_field(const json& record, const char* key, const std::string& context) {
  if (!record.contains(key)) {
    throw std::runtime_error(context + ": missing field '" + key + "'");
  }
  try {
    return record.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::runtime_error(context + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace detail

/// Load a COCO-style annotation file: `images`, `annotations` (bbox as
/// x,y,w,h), `categories` (optional LVIS `frequency` tag). Boxes are
/// converted to corner form. Any dangling reference, non-positive box, or
/// malformed record fails with the offending path and record named.
inline AnnotationSet load_annotations(const std::string& path) {
  const json j = detail::parse_json_file(path);
  if (!j.is_object() || !j.contains("images") || !j.contains("annotations") ||
      !j.contains("categories")) {
    throw std::runtime_error(path +
                             ": expected an object with images, annotations "
                             "and categories arrays");
  }

  AnnotationSet set;
  for (const auto& im : j.at("images")) {
    const std::string ctx = path + ": image record";
    ImageInfo info;
    info.id = detail::get_field<int>(im, "id", ctx);
    info.width = detail::get_field<int>(im, "width", ctx);
    info.height = detail::get_field<int>(im, "height", ctx);
    if (im.contains("file_name")) {
      info.file_name = detail::get_field<std::string>(im, "file_name", ctx);
    }
    set.images.push_back(std::move(info));
  }
  for (const auto& c : j.at("categories")) {
    const std::string ctx = path + ": category record";
    Category cat;
    cat.id = detail::get_field<int>(c, "id", ctx);
    if (c.contains("name")) {
      cat.name = detail::get_field<std::string>(c, "name", ctx);
    }
    if (c.contains("frequency")) {
      cat.frequency = detail::get_field<std::string>(c, "frequency", ctx);
    }
    set.categories.push_back(std::move(cat));
  }
  int next_id = 1;
  for (const auto& a : j.at("annotations")) {
    const std::string ctx = path + ": annotation record";
    Annotation ann;
    ann.id = a.contains("id") ? detail::get_field<int>(a, "id", ctx) : next_id;
    ++next_id;
    ann.image_id = detail::get_field<int>(a, "image_id", ctx);
    ann.category_id = detail::get_field<int>(a, "category_id", ctx);
    const auto bbox = detail::get_field<std::vector<double>>(a, "bbox", ctx);
    if (bbox.size() != 4) {
      throw std::runtime_error(ctx + " " + std::to_string(ann.id) +
                               ": bbox must have four entries");
    }
    if (!(bbox[2] > 0.0) || !(bbox[3] > 0.0)) {
      throw std::runtime_error(ctx + " " + std::to_string(ann.id) +
                               ": bbox width/height must be positive");
    }
    ann.box = BoxXYXY{bbox[0], bbox[1], bbox[0] + bbox[2], bbox[1] + bbox[3]};
    ann.box.category_id = ann.category_id;
    set.annotations.push_back(std::move(ann));
  }
  try {
    validate_annotation_set(set);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return set;
}

// ---------------------------------------------------------------------------
// Dense prediction maps (OWPD binary container)
//
// Layout, all integers little-endian:
//   magic "OWPD" | version u32=1 | level count u32
//   per level: stride u32 | H u32 | W u32 | classification channels u32
//              then H*W*C + H*W*4 + H*W + H*W little-endian f32 values,
//              row-major, channels last, in fixed map order
//              (classification, regression l/r/t/b, centerness, iou).

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_f32(std::string& out, float f) {
  put_u32(out, std::bit_cast<std::uint32_t>(f));
}

class ByteReader {
 public:
  ByteReader(const std::string& data, std::size_t start, std::string path)
      : data_(data), path_(std::move(path)), pos_(start) {}

  std::uint32_t u32() {
    if (pos_ + 4 > data_.size()) {
      throw std::runtime_error(path_ + ": truncated OWPD file");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(data_.data() + pos_);
    pos_ += 4;
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
  }

  float f32() { return std::bit_cast<float>(u32()); }

  void read_f32(std::vector<float>& out, std::size_t count) {
    out.resize(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = f32();
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline void write_dense_maps(const std::string& path,
                             const DensePredictions& preds) {
  std::string out;
  out += "OWPD";
  detail::put_u32(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(preds.levels.size()));
  for (const auto& lp : preds.levels) {
    detail::put_u32(out, static_cast<std::uint32_t>(lp.stride));
    detail::put_u32(out, static_cast<std::uint32_t>(lp.height));
    detail::put_u32(out, static_cast<std::uint32_t>(lp.width));
    detail::put_u32(out, static_cast<std::uint32_t>(lp.num_classes));
    const std::size_t n = lp.location_count();
    if (lp.classification.size() != n * lp.num_classes ||
        lp.regression.size() != n * 4 || lp.centerness.size() != n ||
        lp.iou.size() != n) {
      throw std::invalid_argument(path + ": map sizes disagree with header shape");
    }
    for (float v : lp.classification) detail::put_f32(out, v);
    for (float v : lp.regression) detail::put_f32(out, v);
    for (float v : lp.centerness) detail::put_f32(out, v);
    for (float v : lp.iou) detail::put_f32(out, v);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error(path + ": write failed");
}

inline DensePredictions read_dense_maps(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open file");
  std::string data((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  if (data.size() < 4 || data.compare(0, 4, "OWPD") != 0) {
    throw std::runtime_error(path + ": bad magic, not an OWPD file");
  }
  detail::ByteReader r(data, 4, path);
  const std::uint32_t version = r.u32();
  if (version != 1) {
    throw std::runtime_error(path + ": unsupported OWPD version " +
                             std::to_string(version));
  }
  const std::uint32_t level_count = r.u32();
  DensePredictions preds;
  preds.levels.reserve(level_count);
  for (std::uint32_t k = 0; k < level_count; ++k) {
    LevelPredictions lp;
    lp.stride = static_cast<int>(r.u32());
    lp.height = static_cast<int>(r.u32());
    lp.width = static_cast<int>(r.u32());
    lp.num_classes = static_cast<int>(r.u32());
    if (lp.stride <= 0 || lp.height <= 0 || lp.width <= 0 || lp.num_classes < 0) {
      throw std::runtime_error(path + ": invalid level header");
    }
    const std::size_t n = static_cast<std::size_t>(lp.height) * lp.width;
    r.read_f32(lp.classification, n * lp.num_classes);
    r.read_f32(lp.regression, n * 4);
    r.read_f32(lp.centerness, n);
    r.read_f32(lp.iou, n);
    preds.levels.push_back(std::move(lp));
  }
  if (!r.at_end()) {
    throw std::runtime_error(path + ": trailing bytes after declared payload");
  }
  return preds;
}

// ---------------------------------------------------------------------------
// Configuration

inline json config_to_json(const Config& c) {
  json j;
  j["strides"] = c.strides;
  json edges = json::array();
  for (double e : c.range_edges) {
    if (std::isinf(e)) {
      edges.push_back("inf");
    } else {
      edges.push_back(e);
    }
  }
  j["range_edges"] = edges;
  j["center_radius"] = c.center_radius;
  j["iou_sampling_threshold"] = c.iou_sampling_threshold;
  j["pre_nms_k"] = c.pre_nms_k;
  j["pre_nms_threshold"] = c.pre_nms_threshold;
  j["nms_iou"] = c.nms_iou;
  j["post_nms_n"] = c.post_nms_n;
  j["post_nms_threshold"] = c.post_nms_threshold;
  j["unknown_mask_threshold"] = c.unknown_mask_threshold;
  j["mask_start_iteration"] = c.mask_start_iteration;
  j["mask_variant"] = c.mask_variant;
  j["mask_objectness"] = c.mask_objectness;
  j["area_mask_trigger_nms"] = c.area_mask_trigger_nms;
  j["sampling_mode"] = c.sampling_mode;
  j["scoring_mode"] = c.scoring_mode;
  if (c.per_class_nms.has_value()) j["per_class_nms"] = *c.per_class_nms;
  return j;
}

inline Config config_from_json(const json& j, const std::string& context,
                               std::vector<std::string>* warnings = nullptr) {
  if (!j.is_object()) {
    throw std::runtime_error(context + ": config must be a JSON object");
  }
  Config c;
  auto bad_type = [&context](const char* key) {
    return std::runtime_error(context + ": config field '" + key +
                              "' has the wrong type");
  };
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "strides") {
        c.strides = value.get<std::vector<int>>();
      } else if (key == "range_edges") {
        c.range_edges.clear();
        for (const auto& e : value) {
          if (e.is_string()) {
            if (e.get<std::string>() != "inf") throw bad_type("range_edges");
            c.range_edges.push_back(std::numeric_limits<double>::infinity());
          } else if (e.is_null()) {
            c.range_edges.push_back(std::numeric_limits<double>::infinity());
          } else {
            c.range_edges.push_back(e.get<double>());
          }
        }
      } else if (key == "center_radius") {
        c.center_radius = value.get<double>();
      } else if (key == "iou_sampling_threshold") {
        c.iou_sampling_threshold = value.get<double>();
      } else if (key == "pre_nms_k") {
        c.pre_nms_k = value.get<int>();
      } else if (key == "pre_nms_threshold") {
        c.pre_nms_threshold = value.get<double>();
      } else if (key == "nms_iou") {
        c.nms_iou = value.get<double>();
      } else if (key == "post_nms_n") {
        c.post_nms_n = value.get<int>();
      } else if (key == "post_nms_threshold") {
        c.post_nms_threshold = value.get<double>();
      } else if (key == "unknown_mask_threshold") {
        c.unknown_mask_threshold = value.get<double>();
      } else if (key == "mask_start_iteration") {
        c.mask_start_iteration = value.get<long long>();
      } else if (key == "mask_variant") {
        c.mask_variant = value.get<std::string>();
      } else if (key == "mask_objectness") {
        c.mask_objectness = value.get<std::string>();
      } else if (key == "area_mask_trigger_nms") {
        c.area_mask_trigger_nms = value.get<bool>();
      } else if (key == "sampling_mode") {
        c.sampling_mode = value.get<std::string>();
      } else if (key == "scoring_mode") {
        c.scoring_mode = value.get<std::string>();
      } else if (key == "per_class_nms") {
        c.per_class_nms = value.get<bool>();
      } else {
        if (warnings != nullptr) {
          warnings->push_back(context + ": ignoring unknown config key '" + key + "'");
        }
      }
    } catch (const json::exception&) {
      throw bad_type(key.c_str());
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(context + ": " + e.what());
  }
  return c;
}

inline Config load_config(const std::string& path,
                          std::vector<std::string>* warnings = nullptr) {
  return config_from_json(detail::parse_json_file(path), path, warnings);
}

// ---------------------------------------------------------------------------
// Proposal lists (detection-results JSON)

/// JSON array of {image_id, bbox:[x,y,w,h], score, category_id?} records.
/// Scores are rounded to 32-bit precision on write.
inline void write_proposals(const std::string& path,
                            const std::vector<Detection>& detections) {
  json arr = json::array();
  for (const auto& d : detections) {
    json rec;
    rec["image_id"] = d.image_id;
    rec["bbox"] = {d.box.x1, d.box.y1, d.box.width(), d.box.height()};
    rec["score"] = static_cast<double>(static_cast<float>(d.score));
    if (d.category_id.has_value()) rec["category_id"] = *d.category_id;
    arr.push_back(std::move(rec));
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  f << arr.dump();
  f << '\n';
  if (!f) throw std::runtime_error(path + ": write failed");
}

inline std::vector<Detection> read_proposals(const std::string& path) {
  const json j = detail::parse_json_file(path);
  if (!j.is_array()) {
    throw std::runtime_error(path + ": expected a JSON array of detections");
  }
  std::vector<Detection> out;
  out.reserve(j.size());
  for (const auto& rec : j) {
    const std::string ctx = path + ": detection record";
    Detection d;
    d.image_id = detail::get_field<int>(rec, "image_id", ctx);
    const auto bbox = detail::get_field<std::vector<double>>(rec, "bbox", ctx);
    if (bbox.size() != 4 || !(bbox[2] > 0.0) || !(bbox[3] > 0.0)) {
      throw std::runtime_error(ctx + ": bbox must be [x,y,w,h] with positive size");
    }
    d.box = BoxXYXY{bbox[0], bbox[1], bbox[0] + bbox[2], bbox[1] + bbox[3]};
    d.score = detail::get_field<double>(rec, "score", ctx);
    if (rec.contains("category_id")) {
      d.category_id = detail::get_field<int>(rec, "category_id", ctx);
    }
    out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Split files

/// {"seen": [ids...], "novel": [ids...]}
inline ClassSplit load_split(const std::string& path) {
  const json j = detail::parse_json_file(path);
  ClassSplit split;
  const auto seen = detail::get_field<std::vector<int>>(j, "seen", path);
  const auto novel = detail::get_field<std::vector<int>>(j, "novel", path);
  split.seen_ids.insert(seen.begin(), seen.end());
  split.novel_ids.insert(novel.begin(), novel.end());
  for (int id : split.seen_ids) {
    if (split.novel_ids.count(id)) {
      throw std::runtime_error(path + ": category id " + std::to_string(id) +
                               " appears in both seen and novel");
    }
  }
  return split;
}

}  // namespace owp
