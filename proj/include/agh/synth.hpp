// Copyright 2026 The AGH Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "agh/types.hpp"

namespace agh {

/// Clustered local-feature datasets. Each image is assigned one of
/// `clusters` Gaussian centers; its local features are that center plus
/// isotropic Gaussian noise of relative scale `noise`. Centers have
/// per-coordinate variance 1/D and noise (noise^2)/D, so local features have
/// roughly unit norm, like normalized embedded descriptors. Local feature
/// values are rounded to float so they survive an fvecs round trip unchanged.
struct SyntheticSpec {
  int image_count = 1000;
  int feature_dim = 32;
  int clusters = 10;
  int min_locals = 100;
  int max_locals = 300;
  double noise = 0.5;
  int query_count = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticDataset {
  std::vector<LocalFeatureSet> database;
  std::vector<LocalFeatureSet> queries;
  std::vector<std::int32_t> database_labels;
  std::vector<std::int32_t> query_labels;
  DataMatrix centers;  // D x clusters
};

SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace agh
