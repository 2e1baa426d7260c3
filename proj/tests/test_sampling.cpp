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

#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "owp/sampling.hpp"
#include "owp/rng.hpp"
#include "test_support.hpp"

using namespace owp;
using test_support::kInf;

namespace {

// 4x4 single-level assignment with a centered box; handy fixture.
struct Fixture {
  std::vector<FpnLevelSpec> levels{{8, 0.0, kInf}};
  AssignmentResult assignment;
  Fixture() {
    const auto grids = make_location_grids(32, 32, levels);
    assignment = assign_targets({BoxXYXY{2, 2, 30, 30}}, levels, grids, 1.5);
  }
  std::vector<DenseMap> maps_with(float fg_value) const {
    std::vector<DenseMap> maps{DenseMap(4, 4, 0.0f)};
    for (std::size_t idx = 0; idx < 16; ++idx) {
      if (assignment.levels[0].is_foreground(idx)) {
        maps[0].values[idx] = fg_value;
      }
    }
    return maps;
  }
};

// Random foreground/target maps over a random assignment.
struct RandomMaps {
  AssignmentResult assignment;
  std::vector<DenseMap> targets;
};

RandomMaps random_maps(CounterRng& rng) {
  const auto levels = test_support::two_level_spec();
  const auto inst = test_support::random_assignment_instance(rng, 6, 32);
  RandomMaps rm;
  rm.assignment = assign_targets(
      inst.boxes, levels, make_location_grids(inst.image_h, inst.image_w, levels),
      1.5);
  for (const auto& lv : rm.assignment.levels) {
    DenseMap m(lv.grid.height, lv.grid.width, 0.0f);
    for (std::size_t idx = 0; idx < m.values.size(); ++idx) {
      if (lv.is_foreground(idx)) {
        m.values[idx] = static_cast<float>(rng.uniform(0.0, 1.0));
      }
    }
    rm.targets.push_back(std::move(m));
  }
  return rm;
}

}  // namespace

TEST_CASE("iou sampling zeroes only sub-threshold foreground", "[sampling]") {
  Fixture f;
  auto low = f.maps_with(0.2f);
  auto out = iou_sampling(low, f.assignment, 0.3);
  for (std::size_t idx = 0; idx < 16; ++idx) {
    if (f.assignment.levels[0].is_foreground(idx)) CHECK(out[0].values[idx] == 0.0f);
  }

  auto high = f.maps_with(0.95f);
  out = iou_sampling(high, f.assignment, 0.3);
  CHECK(out[0].values == high[0].values);

  // strict comparison keeps the boundary value
  auto boundary = f.maps_with(0.3f);
  out = iou_sampling(boundary, f.assignment, 0.3);
  CHECK(out[0].values == boundary[0].values);

  CHECK_THROWS_AS(iou_sampling(low, f.assignment, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(iou_sampling(low, f.assignment, 1.0), std::invalid_argument);
}

TEST_CASE("iou sampling is idempotent and never raises targets", "[sampling]") {
  CounterRng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto rm = random_maps(rng);
    const auto once = iou_sampling(rm.targets, rm.assignment, 0.3);
    const auto twice = iou_sampling(once, rm.assignment, 0.3);
    for (std::size_t k = 0; k < once.size(); ++k) {
      CHECK(once[k].values == twice[k].values);
      for (std::size_t idx = 0; idx < once[k].values.size(); ++idx) {
        CHECK(once[k].values[idx] <= rm.targets[k].values[idx]);
        if (rm.targets[k].values[idx] >= 0.3f) {
          CHECK(once[k].values[idx] == rm.targets[k].values[idx]);
        }
        // no mass left in the open interval (0, 0.3)
        CHECK((once[k].values[idx] == 0.0f || once[k].values[idx] >= 0.3f));
      }
    }
  }
}

TEST_CASE("training-set modes follow their definitions", "[sampling]") {
  // ALL mode on a 2x2 single-level all-background grid: 4 samples
  const std::vector<FpnLevelSpec> levels{{8, 0.0, kInf}};
  const auto grids = make_location_grids(16, 16, levels);
  const auto empty = assign_targets({}, levels, grids, 1.5);
  std::vector<DenseMap> zeros{DenseMap(2, 2, 0.0f)};
  const auto all = build_objectness_training_set(empty, zeros, SamplingMode::kAll);
  CHECK(all.samples.size() == 4);
  CHECK(all.background_samples == 4);

  // FCOS_DEFAULT on an all-background image: empty set
  const auto fd = build_objectness_training_set(empty, zeros, SamplingMode::kFcosDefault);
  CHECK(fd.samples.empty());

  // CS_IS includes a center-sampled location with target 0.1 as a zero
  Fixture f;
  auto maps = f.maps_with(0.1f);
  const auto cs = build_objectness_training_set(f.assignment, maps, SamplingMode::kCsIs);
  REQUIRE_FALSE(cs.samples.empty());
  for (const auto& s : cs.samples) {
    CHECK(s.foreground);
    CHECK(s.target == 0.0);
  }
  // and the same set under FCOS_DEFAULT keeps the raw 0.1 targets
  const auto raw = build_objectness_training_set(f.assignment, maps,
                                                 SamplingMode::kFcosDefault);
  REQUIRE(raw.samples.size() == cs.samples.size());
  for (const auto& s : raw.samples) CHECK(s.target == Catch::Approx(0.1).margin(1e-7));
}

TEST_CASE("mode-level set properties hold on random instances", "[sampling]") {
  CounterRng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    auto rm = random_maps(rng);
    const auto all = build_objectness_training_set(rm.assignment, rm.targets,
                                                   SamplingMode::kAll);
    CHECK(all.samples.size() == rm.assignment.location_count());

    const auto cs_is = build_objectness_training_set(rm.assignment, rm.targets,
                                                     SamplingMode::kCsIs);
    for (const auto& s : cs_is.samples) {
      CHECK((s.target == 0.0 || s.target >= 0.3));
    }
    CHECK(cs_is.samples.size() == rm.assignment.center_sampled_count());

    const auto fd = build_objectness_training_set(rm.assignment, rm.targets,
                                                  SamplingMode::kFcosDefault);
    const auto stats_all = sample_balance_stats(all);
    const auto stats_fd = sample_balance_stats(fd);
    CHECK(stats_all.negatives >= stats_fd.negatives);
  }
}

TEST_CASE("balance stats count positives and negatives at the cut", "[sampling]") {
  ObjectnessTrainingSet set;
  for (double t : {0.9, 0.8, 0.1, 0.0}) {
    set.samples.push_back(TrainingSample{0, 0, 0, t, true});
  }
  auto stats = sample_balance_stats(set, 0.5);
  CHECK(stats.positives == 2);
  CHECK(stats.negatives == 2);
  CHECK(stats.ratio == 1.0);

  ObjectnessTrainingSet ones;
  for (int i = 0; i < 3; ++i) ones.samples.push_back(TrainingSample{0, 0, i, 1.0, true});
  stats = sample_balance_stats(ones, 0.5);
  CHECK(stats.positives == 3);
  CHECK(stats.negatives == 0);
  CHECK(std::isinf(stats.ratio));

  stats = sample_balance_stats(ObjectnessTrainingSet{}, 0.5);
  CHECK(stats.positives == 0);
  CHECK(stats.negatives == 0);
  CHECK(stats.ratio == 0.0);
}
