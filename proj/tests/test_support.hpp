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
// Test-only oracles and generators. Everything here re-states the rules
// independently of the library code paths it is used to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "owp/assignment.hpp"
#include "owp/eval.hpp"
#include "owp/geometry.hpp"
#include "owp/pipeline.hpp"
#include "owp/rng.hpp"

namespace test_support {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline std::vector<owp::FpnLevelSpec> two_level_spec() {
  return {{8, 0.0, 64.0}, {16, 64.0, kInf}};
}

// ---------------------------------------------------------------------------
// Assignment oracle

struct RandomAssignmentInstance {
  int image_h = 0;
  int image_w = 0;
  std::vector<owp::BoxXYXY> boxes;
};

inline RandomAssignmentInstance random_assignment_instance(owp::CounterRng& rng,
                                                           int max_boxes,
                                                           int max_grid) {
  RandomAssignmentInstance inst;
  inst.image_h = 32 + static_cast<int>(rng.next_below(max_grid * 8 - 31));
  inst.image_w = 32 + static_cast<int>(rng.next_below(max_grid * 8 - 31));
  const int n = static_cast<int>(rng.next_below(max_boxes + 1));
  for (int b = 0; b < n; ++b) {
    const double x1 = rng.uniform(-8.0, inst.image_w - 4.0);
    const double y1 = rng.uniform(-8.0, inst.image_h - 4.0);
    const double w = rng.uniform(3.0, inst.image_w * 0.8);
    const double h = rng.uniform(3.0, inst.image_h * 0.8);
    inst.boxes.push_back(owp::BoxXYXY{x1, y1, x1 + w, y1 + h});
  }
  return inst;
}

// Straight re-application of the assignment rules, organized differently
// from the library: gather all strictly containing boxes per location, pick
// the smallest area, then gate by the level range.
inline owp::AssignmentResult brute_force_assignment(
    const std::vector<owp::BoxXYXY>& boxes,
    const std::vector<owp::FpnLevelSpec>& levels,
    const std::vector<owp::LocationGrid>& grids, double center_radius) {
  owp::AssignmentResult result;
  result.levels.resize(levels.size());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    auto& lv = result.levels[k];
    lv.grid = grids[k];
    lv.grid.level = static_cast<int>(k);
    const std::size_t n = lv.grid.location_count();
    lv.matched_gt.assign(n, -1);
    lv.regression_target.assign(n, owp::Ltrb{});
    lv.centerness_target.assign(n, 0.0);
    lv.center_sampled.assign(n, 0);

    for (int i = 0; i < lv.grid.height; ++i) {
      for (int j = 0; j < lv.grid.width; ++j) {
        const double x = lv.grid.stride / 2 + j * static_cast<double>(lv.grid.stride);
        const double y = lv.grid.stride / 2 + i * static_cast<double>(lv.grid.stride);
        std::vector<std::size_t> containing;
        for (std::size_t b = 0; b < boxes.size(); ++b) {
          if (x > boxes[b].x1 && x < boxes[b].x2 && y > boxes[b].y1 &&
              y < boxes[b].y2) {
            containing.push_back(b);
          }
        }
        if (containing.empty()) continue;
        std::size_t winner = containing[0];
        for (std::size_t c : containing) {
          const double area_c =
              (boxes[c].x2 - boxes[c].x1) * (boxes[c].y2 - boxes[c].y1);
          const double area_w = (boxes[winner].x2 - boxes[winner].x1) *
                                (boxes[winner].y2 - boxes[winner].y1);
          if (area_c < area_w) winner = c;
        }
        const owp::BoxXYXY& box = boxes[winner];
        const double l = x - box.x1;
        const double r = box.x2 - x;
        const double t = y - box.y1;
        const double bb = box.y2 - y;
        const double m = std::max(std::max(l, r), std::max(t, bb));
        if (!(m >= levels[k].range_min && m < levels[k].range_max)) continue;

        const std::size_t idx = static_cast<std::size_t>(i) * lv.grid.width + j;
        lv.matched_gt[idx] = static_cast<std::int32_t>(winner);
        lv.regression_target[idx] = owp::Ltrb{l, r, t, bb};
        const double h_ratio = std::min(l, r) / std::max(l, r);
        const double v_ratio = std::min(t, bb) / std::max(t, bb);
        lv.centerness_target[idx] = std::sqrt(h_ratio * v_ratio);
        const double cx = 0.5 * (box.x1 + box.x2);
        const double cy = 0.5 * (box.y1 + box.y2);
        const double radius = center_radius * levels[k].stride;
        lv.center_sampled[idx] =
            (std::abs(x - cx) <= radius && std::abs(y - cy) <= radius) ? 1 : 0;
      }
    }
  }
  return result;
}

inline bool assignments_identical(const owp::AssignmentResult& a,
                                  const owp::AssignmentResult& b) {
  if (a.levels.size() != b.levels.size()) return false;
  for (std::size_t k = 0; k < a.levels.size(); ++k) {
    const auto& la = a.levels[k];
    const auto& lb = b.levels[k];
    if (la.matched_gt != lb.matched_gt) return false;
    if (la.center_sampled != lb.center_sampled) return false;
    if (la.centerness_target != lb.centerness_target) return false;
    for (std::size_t idx = 0; idx < la.regression_target.size(); ++idx) {
      if (!(la.regression_target[idx] == lb.regression_target[idx])) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// NMS oracle: erase-from-pool greedy, organized unlike the library version.

inline std::vector<owp::Proposal> naive_nms(std::vector<owp::Proposal> pool,
                                            double iou_threshold,
                                            bool per_class = false) {
  std::vector<owp::Proposal> kept;
  while (!pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
      if (owp::proposal_before(pool[i], pool[best])) best = i;
    }
    const owp::Proposal top = pool[best];
    kept.push_back(top);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
    for (auto it = pool.begin(); it != pool.end();) {
      const bool same_class = !per_class || it->class_id == top.class_id;
      if (same_class && owp::iou_xyxy(top.box, it->box) > iou_threshold) {
        it = pool.erase(it);
      } else {
        ++it;
      }
    }
  }
  return kept;
}

inline std::vector<owp::Proposal> random_proposals(owp::CounterRng& rng, int count,
                                                   double canvas = 200.0) {
  std::vector<owp::Proposal> props;
  for (int i = 0; i < count; ++i) {
    owp::Proposal p;
    const double x1 = rng.uniform(0.0, canvas - 5.0);
    const double y1 = rng.uniform(0.0, canvas - 5.0);
    p.box = owp::BoxXYXY{x1, y1, x1 + rng.uniform(2.0, canvas * 0.5),
                         y1 + rng.uniform(2.0, canvas * 0.5)};
    p.score = rng.uniform(0.0, 1.0);
    p.level = 0;
    p.row = i;
    p.col = 0;
    props.push_back(p);
  }
  return props;
}

inline bool proposals_identical(const std::vector<owp::Proposal>& a,
                                const std::vector<owp::Proposal>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].box == b[i].box) || a[i].score != b[i].score ||
        a[i].level != b[i].level || a[i].row != b[i].row || a[i].col != b[i].col) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Recall oracle: exhaustive maximum matching per IOU threshold.

// Maximum bipartite matching size between proposals and ground truths with
// an edge where IOU >= tau, via bitmask recursion over the ground truths.
inline std::size_t max_matching_count(const std::vector<std::vector<double>>& iou,
                                      double tau) {
  const std::size_t n_det = iou.size();
  const std::size_t n_gt = n_det == 0 ? 0 : iou[0].size();
  std::vector<std::vector<int>> memo(
      n_det + 1, std::vector<int>(static_cast<std::size_t>(1) << n_gt, -1));
  std::function<int(std::size_t, unsigned)> solve =
      [&](std::size_t d, unsigned used) -> int {
    if (d == n_det) return 0;
    int& slot = memo[d][used];
    if (slot >= 0) return slot;
    int best = solve(d + 1, used);  // leave detection d unmatched
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (used & (1u << g)) continue;
      if (iou[d][g] >= tau) {
        best = std::max(best, 1 + solve(d + 1, used | (1u << g)));
      }
    }
    slot = best;
    return best;
  };
  return static_cast<std::size_t>(solve(0, 0));
}

struct RecallInstance {
  std::vector<owp::BoxXYXY> gt;
  std::vector<owp::Detection> proposals;  // single shared image id
};

// Realistic small instances: ground truths with bounded overlap, proposals
// mostly jittered copies plus a few strays.
inline RecallInstance random_recall_instance(owp::CounterRng& rng, int image_id,
                                             int max_gt = 5, int max_props = 8) {
  RecallInstance inst;
  const double canvas = 220.0;
  const int n_gt = 1 + static_cast<int>(rng.next_below(max_gt));
  int guard = 0;
  while (static_cast<int>(inst.gt.size()) < n_gt && guard < 200) {
    ++guard;
    const double x1 = rng.uniform(0.0, canvas - 40.0);
    const double y1 = rng.uniform(0.0, canvas - 40.0);
    owp::BoxXYXY cand{x1, y1, x1 + rng.uniform(16.0, 60.0),
                      y1 + rng.uniform(16.0, 60.0)};
    bool ok = true;
    for (const auto& g : inst.gt) {
      if (owp::iou_xyxy(cand, g) > 0.35) ok = false;
    }
    if (ok) inst.gt.push_back(cand);
  }
  const int n_props = static_cast<int>(rng.next_below(max_props + 1));
  for (int p = 0; p < n_props; ++p) {
    owp::Detection d;
    d.image_id = image_id;
    d.score = rng.uniform(0.05, 1.0);
    if (!inst.gt.empty() && rng.next_double() < 0.75) {
      const auto& g = inst.gt[rng.next_below(inst.gt.size())];
      const double jx = rng.uniform(-6.0, 6.0);
      const double jy = rng.uniform(-6.0, 6.0);
      const double jw = rng.uniform(0.85, 1.15);
      const double jh = rng.uniform(0.85, 1.15);
      const double w = (g.x2 - g.x1) * jw;
      const double h = (g.y2 - g.y1) * jh;
      d.box = owp::BoxXYXY{g.x1 + jx, g.y1 + jy, g.x1 + jx + w, g.y1 + jy + h};
    } else {
      const double x1 = rng.uniform(0.0, canvas - 20.0);
      const double y1 = rng.uniform(0.0, canvas - 20.0);
      d.box = owp::BoxXYXY{x1, y1, x1 + rng.uniform(8.0, 50.0),
                           y1 + rng.uniform(8.0, 50.0)};
    }
    inst.proposals.push_back(d);
  }
  return inst;
}

// Average recall with exhaustive matching instead of greedy, same pooling
// and threshold set as the library definition.
inline std::optional<double> exhaustive_average_recall(
    const std::vector<RecallInstance>& instances, int top_n) {
  std::vector<double> taus;
  for (int k = 0; k < 10; ++k) taus.push_back(0.5 + 0.05 * k);
  std::vector<std::size_t> matched(taus.size(), 0);
  std::size_t total_gt = 0;
  for (const auto& inst : instances) {
    if (inst.gt.empty()) continue;
    total_gt += inst.gt.size();
    auto props = inst.proposals;
    std::stable_sort(props.begin(), props.end(),
                     [](const owp::Detection& a, const owp::Detection& b) {
                       return a.score > b.score;
                     });
    if (props.size() > static_cast<std::size_t>(top_n)) props.resize(top_n);
    std::vector<std::vector<double>> iou(props.size(),
                                         std::vector<double>(inst.gt.size()));
    for (std::size_t d = 0; d < props.size(); ++d) {
      for (std::size_t g = 0; g < inst.gt.size(); ++g) {
        iou[d][g] = owp::iou_xyxy(props[d].box, inst.gt[g]);
      }
    }
    for (std::size_t t = 0; t < taus.size(); ++t) {
      matched[t] += max_matching_count(iou, taus[t]);
    }
  }
  if (total_gt == 0) return std::nullopt;
  double ar = 0.0;
  for (std::size_t t = 0; t < taus.size(); ++t) {
    ar += static_cast<double>(matched[t]) / static_cast<double>(total_gt);
  }
  return ar / static_cast<double>(taus.size());
}

// ---------------------------------------------------------------------------
// Filesystem scratch space

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto candidate = base / ("owp_" + tag + "_" + std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("could not create a scratch directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

}  // namespace test_support
