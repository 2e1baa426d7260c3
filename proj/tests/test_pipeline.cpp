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

#include <cmath>
#include <vector>

#include "owp/pipeline.hpp"
#include "owp/rng.hpp"
#include "test_support.hpp"

using namespace owp;

namespace {

// Single-level predictions with every location carrying the same box shape
// but controllable scores.
DensePredictions uniform_preds(int h, int w, int num_classes = 0) {
  DensePredictions preds;
  preds.levels.push_back(make_level_predictions(8, h, w, num_classes));
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      preds.levels[0].set_regression(i, j, Ltrb{3, 3, 3, 3});
    }
  }
  return preds;
}

}  // namespace

TEST_CASE("score maps implement every mode", "[pipeline]") {
  DensePredictions preds = uniform_preds(1, 1, 2);
  auto& lp = preds.levels[0];
  lp.centerness[0] = 0.81f;
  lp.iou[0] = 0.49f;
  lp.cls_at(0, 0, 0) = 0.2f;
  lp.cls_at(0, 0, 1) = 0.9f;

  CHECK(score_map(preds, ScoringMode::kCenterness).score[0].values[0] == 0.81f);
  CHECK(score_map(preds, ScoringMode::kIou).score[0].values[0] == 0.49f);
  CHECK(score_map(preds, ScoringMode::kGeomean).score[0].values[0] ==
        Catch::Approx(0.63).margin(1e-6));

  const auto logits = score_map(preds, ScoringMode::kLogitsIou);
  CHECK(logits.score[0].values[0] == Catch::Approx(0.45).margin(1e-6));
  REQUIRE(logits.class_ids.size() == 1);
  CHECK(logits.class_ids[0][0] == 1);

  const auto logits_ctr = score_map(preds, ScoringMode::kLogitsCenterness);
  CHECK(logits_ctr.score[0].values[0] == Catch::Approx(0.9 * 0.81).margin(1e-6));

  DensePredictions no_classes = uniform_preds(1, 1, 0);
  CHECK_THROWS_AS(score_map(no_classes, ScoringMode::kLogitsIou),
                  std::invalid_argument);

  CounterRng rng(5);
  DensePredictions random = uniform_preds(6, 6, 3);
  for (auto& v : random.levels[0].centerness) v = static_cast<float>(rng.next_double());
  for (auto& v : random.levels[0].iou) v = static_cast<float>(rng.next_double());
  for (auto& v : random.levels[0].classification) v = static_cast<float>(rng.next_double());
  for (ScoringMode m : {ScoringMode::kCenterness, ScoringMode::kIou,
                        ScoringMode::kGeomean, ScoringMode::kLogitsCenterness,
                        ScoringMode::kLogitsIou}) {
    for (float s : score_map(random, m).score[0].values) {
      CHECK(s >= 0.0f);
      CHECK(s <= 1.0f);
    }
  }
}

TEST_CASE("pre-nms selection keeps the top k above threshold", "[pipeline]") {
  DensePredictions preds = uniform_preds(50, 50);
  CounterRng rng(9);
  for (auto& v : preds.levels[0].iou) v = static_cast<float>(rng.next_double());
  const auto scores = score_map(preds, ScoringMode::kIou);

  // everything below threshold: empty result
  CHECK(select_pre_nms(preds, scores, 2000, 1.0).empty());

  const auto all = select_pre_nms(preds, scores, 5000, 0.05);
  const auto capped = select_pre_nms(preds, scores, 2000, 0.05);
  REQUIRE(all.size() > 2000);
  REQUIRE(capped.size() == 2000);
  // sort-oracle: kept scores dominate every discarded score
  double min_kept = 2.0;
  for (const auto& p : capped) min_kept = std::min(min_kept, p.score);
  for (std::size_t i = 2000; i < all.size(); ++i) {
    CHECK(all[i].score <= min_kept);
  }
  for (std::size_t i = 0; i + 1 < capped.size(); ++i) {
    CHECK(proposal_before(capped[i], capped[i + 1]));
  }

  // decoded geometry: location (12,12) with (3,3,3,3) becomes (9,9,15,15)
  DensePredictions one = uniform_preds(4, 4);
  one.levels[0].iou[5] = 0.9f;  // grid (1,1) = image (12,12)
  const auto single = select_pre_nms(one, score_map(one, ScoringMode::kIou), 10, 0.5);
  REQUIRE(single.size() == 1);
  CHECK(single[0].box == BoxXYXY{9, 9, 15, 15});
  CHECK(single[0].level == 0);
  CHECK(single[0].row == 1);
  CHECK(single[0].col == 1);

  // clipping: boxes poking outside the image bounds get trimmed
  DensePredictions big = uniform_preds(2, 2);
  big.levels[0].set_regression(0, 0, Ltrb{100, 100, 100, 100});
  big.levels[0].iou[0] = 0.9f;
  const auto clipped = select_pre_nms(big, score_map(big, ScoringMode::kIou), 10, 0.5);
  REQUIRE(clipped.size() == 1);
  CHECK(clipped[0].box == BoxXYXY{0, 0, 16, 16});
}

TEST_CASE("greedy nms equals the erase-based oracle", "[pipeline]") {
  // two identical boxes: higher score survives
  std::vector<Proposal> pair;
  Proposal a, b;
  a.box = BoxXYXY{0, 0, 10, 10};
  a.score = 0.9;
  b.box = a.box;
  b.score = 0.8;
  b.row = 1;
  pair = {a, b};
  auto kept = nms(pair, 0.6);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == 0.9);

  // disjoint boxes all survive
  std::vector<Proposal> disjoint;
  for (int i = 0; i < 5; ++i) {
    Proposal p;
    p.box = BoxXYXY{i * 20.0, 0, i * 20.0 + 10, 10};
    p.score = 0.5 + 0.05 * i;
    p.row = i;
    disjoint.push_back(p);
  }
  CHECK(nms(disjoint, 0.5).size() == 5);

  CounterRng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(120));
    const auto props = test_support::random_proposals(rng, n);
    for (double threshold : {0.3, 0.5, 0.6, 0.7}) {
      const auto ours = nms(props, threshold);
      const auto oracle = test_support::naive_nms(props, threshold);
      REQUIRE(test_support::proposals_identical(ours, oracle));
      // kept set is mutually below the threshold
      for (std::size_t i = 0; i < ours.size(); ++i) {
        for (std::size_t j = i + 1; j < ours.size(); ++j) {
          CHECK(iou_xyxy(ours[i].box, ours[j].box) <= threshold);
        }
      }
    }
  }
}

TEST_CASE("per-class nms only suppresses within a class", "[pipeline]") {
  Proposal a, b;
  a.box = BoxXYXY{0, 0, 10, 10};
  a.score = 0.9;
  a.class_id = 1;
  b.box = a.box;
  b.score = 0.8;
  b.class_id = 2;
  b.row = 1;
  CHECK(nms({a, b}, 0.6, false).size() == 1);
  CHECK(nms({a, b}, 0.6, true).size() == 2);
}

TEST_CASE("post-nms keeps survivors above the floor", "[pipeline]") {
  CounterRng rng(21);
  auto props = test_support::random_proposals(rng, 150);
  std::sort(props.begin(), props.end(), proposal_before);

  auto out = select_post_nms(props, 100, 0.0);
  REQUIRE(out.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) CHECK(out[i].score == props[i].score);

  auto forty = props;
  forty.resize(40);
  CHECK(select_post_nms(forty, 100, 0.0).size() == 40);

  out = select_post_nms(props, 100, 0.5);
  for (const auto& p : out) CHECK(p.score >= 0.5);
}

TEST_CASE("run_pipeline equals hand-composed stages", "[pipeline]") {
  CounterRng rng(33);
  DensePredictions preds;
  preds.levels.push_back(make_level_predictions(8, 16, 16, 0));
  preds.levels.push_back(make_level_predictions(16, 8, 8, 0));
  for (auto& lp : preds.levels) {
    for (int i = 0; i < lp.height; ++i) {
      for (int j = 0; j < lp.width; ++j) {
        lp.set_regression(i, j, Ltrb{rng.uniform(0.5, 40), rng.uniform(0.5, 40),
                                     rng.uniform(0.5, 40), rng.uniform(0.5, 40)});
        lp.iou[static_cast<std::size_t>(i) * lp.width + j] =
            static_cast<float>(rng.next_double());
        lp.centerness[static_cast<std::size_t>(i) * lp.width + j] =
            static_cast<float>(rng.next_double());
      }
    }
  }
  PipelineParams params;
  params.pre_nms_k = 64;
  params.post_nms_n = 16;
  params.image_width = 128;
  params.image_height = 128;

  const auto direct = run_pipeline(preds, ScoringMode::kGeomean, params);
  const auto staged = select_post_nms(
      nms(select_pre_nms(preds, score_map(preds, ScoringMode::kGeomean),
                         params.pre_nms_k, params.pre_nms_threshold,
                         params.image_width, params.image_height),
          params.nms_iou, false),
      params.post_nms_n, params.post_nms_threshold);
  REQUIRE(test_support::proposals_identical(direct, staged));

  // determinism: a second run is identical
  const auto again = run_pipeline(preds, ScoringMode::kGeomean, params);
  REQUIRE(test_support::proposals_identical(direct, again));

  // empty predictions produce an empty list
  DensePredictions empty;
  CHECK(run_pipeline(empty, ScoringMode::kIou, params).empty());
}
