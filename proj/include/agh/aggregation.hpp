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

// Generalized max pooling: the aggregated vector phi of an image with local
// features V (D x n) is the ridge solution
//
//   phi = argmin ||V^T phi - 1||^2 + mu ||phi||^2 = (V V^T + mu I)^{-1} V 1,
//
// which makes the dot product of phi with every local feature close to 1.

#include <vector>

#include "agh/types.hpp"

namespace agh {

struct GmpParams {
  double mu = 100.0;
};

Vector gmp_aggregate(const LocalFeatureSet& local, const GmpParams& params);

/// Column i is gmp_aggregate(dataset[i]). Errors carry the image index.
DataMatrix gmp_aggregate_all(const std::vector<LocalFeatureSet>& dataset,
                             const GmpParams& params, int threads = 1);

/// Scales every nonzero column to unit l2 norm in place.
void normalize_columns(DataMatrix& matrix);

}  // namespace agh
