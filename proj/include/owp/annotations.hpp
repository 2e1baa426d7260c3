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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "owp/geometry.hpp"

namespace owp {

struct ImageInfo {
  int id = 0;
  int width = 0;
  int height = 0;
  std::string file_name;
};

/// One ground-truth instance; the box is kept in corner form internally
/// (files carry x,y,w,h).
struct Annotation {
  int id = 0;
  int image_id = 0;
  int category_id = 0;
  BoxXYXY box;
};

struct Category {
  int id = 0;
  std::string name;
  // LVIS-style tag: "r", "c", or "f". Absent for plain COCO taxonomies.
  std::optional<std::string> frequency;
};

struct AnnotationSet {
  std::vector<ImageInfo> images;
  std::vector<Annotation> annotations;
  std::vector<Category> categories;

  const ImageInfo* find_image(int id) const {
    for (const auto& im : images) {
      if (im.id == id) return &im;
    }
    return nullptr;
  }

  const Category* find_category(int id) const {
    for (const auto& c : categories) {
      if (c.id == id) return &c;
    }
    return nullptr;
  }

  std::vector<Annotation> annotations_for_image(int image_id) const {
    std::vector<Annotation> out;
    for (const auto& a : annotations) {
      if (a.image_id == image_id) out.push_back(a);
    }
    return out;
  }

  std::vector<BoxXYXY> boxes_for_image(int image_id) const {
    std::vector<BoxXYXY> out;
    for (const auto& a : annotations) {
      if (a.image_id == image_id) out.push_back(a.box);
    }
    return out;
  }

  std::vector<int> sorted_image_ids() const {
    std::vector<int> ids;
    ids.reserve(images.size());
    for (const auto& im : images) ids.push_back(im.id);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  /// Category ids in ascending order; also the classification channel
  /// order used by the synthetic detector.
  std::vector<int> sorted_category_ids() const {
    std::vector<int> ids;
    ids.reserve(categories.size());
    for (const auto& c : categories) ids.push_back(c.id);
    std::sort(ids.begin(), ids.end());
    return ids;
  }
};

/// Referential integrity and box validity; thrown errors name the record.
inline void validate_annotation_set(const AnnotationSet& set) {
  for (const auto& a : set.annotations) {
    if (set.find_image(a.image_id) == nullptr) {
      throw std::runtime_error("annotation " + std::to_string(a.id) +
                               " references missing image id " +
                               std::to_string(a.image_id));
    }
    if (set.find_category(a.category_id) == nullptr) {
      throw std::runtime_error("annotation " + std::to_string(a.id) +
                               " references missing category id " +
                               std::to_string(a.category_id));
    }
    if (!a.box.is_valid()) {
      throw std::runtime_error("annotation " + std::to_string(a.id) +
                               " has a non-positive or non-finite box");
    }
  }
  for (const auto& im : set.images) {
    if (im.width <= 0 || im.height <= 0) {
      throw std::runtime_error("image " + std::to_string(im.id) +
                               " has non-positive dimensions");
    }
  }
}

}  // namespace owp
