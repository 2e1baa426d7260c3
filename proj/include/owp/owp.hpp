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

#include "owp/annotations.hpp"
#include "owp/assignment.hpp"
#include "owp/config.hpp"
#include "owp/dense_map.hpp"
#include "owp/eval.hpp"
#include "owp/geometry.hpp"
#include "owp/io.hpp"
#include "owp/losses.hpp"
#include "owp/masking.hpp"
#include "owp/pipeline.hpp"
#include "owp/predictions.hpp"
#include "owp/rng.hpp"
#include "owp/sampling.hpp"
#include "owp/synth.hpp"
