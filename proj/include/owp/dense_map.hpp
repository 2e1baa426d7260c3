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
#include <stdexcept>
#include <string>
#include <vector>

namespace owp {

/// Single-channel H x W map, row-major, 32-bit storage.
struct DenseMap {
  int height = 0;
  int width = 0;
  std::vector<float> values;

  DenseMap() = default;
  DenseMap(int h, int w, float fill = 0.0f)
      : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

  float& at(int i, int j) { return values[static_cast<std::size_t>(i) * width + j]; }
  float at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * width + j];
  }
  std::size_t size() const { return values.size(); }
};

inline void require_same_shape(const DenseMap& a, int height, int width,
                               const char* what) {
  if (a.height != height || a.width != width ||
      a.values.size() != static_cast<std::size_t>(height) * width) {
    throw std::invalid_argument(std::string(what) + ": map shape mismatch");
  }
}

}  // namespace owp
