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

#include "agh/synth.hpp"

#include <cmath>

#include <random>
#include <stdexcept>

namespace agh {

void SyntheticSpec::validate() const {
  if (image_count < 1 || feature_dim < 1 || clusters < 1 || min_locals < 1 ||
      max_locals < 1 || query_count < 1 || !(noise > 0.0))
    throw std::invalid_argument("synthetic spec: all sizes and noise must be positive");
  if (min_locals > max_locals)
    throw std::invalid_argument("synthetic spec: min_locals exceeds max_locals");
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double unit = 1.0 / std::sqrt(static_cast<double>(spec.feature_dim));
  std::uniform_int_distribution<int> pick_cluster(0, spec.clusters - 1);
  std::uniform_int_distribution<int> pick_count(spec.min_locals, spec.max_locals);

  SyntheticDataset out;
  out.centers.resize(spec.feature_dim, spec.clusters);
  for (int c = 0; c < spec.clusters; ++c)
    for (int d = 0; d < spec.feature_dim; ++d) out.centers(d, c) = unit * gauss(rng);

  auto draw = [&](int count, std::vector<LocalFeatureSet>& images,
                  std::vector<std::int32_t>& labels) {
    images.reserve(static_cast<std::size_t>(count));
    labels.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const int label = pick_cluster(rng);
      const int n = pick_count(rng);
      LocalFeatureSet local(spec.feature_dim, n);
      for (int j = 0; j < n; ++j)
        for (int d = 0; d < spec.feature_dim; ++d)
          local(d, j) = static_cast<float>(out.centers(d, label) +
                                           spec.noise * unit * gauss(rng));
      images.push_back(std::move(local));
      labels.push_back(label);
    }
  };
  draw(spec.image_count, out.database, out.database_labels);
  draw(spec.query_count, out.queries, out.query_labels);
  return out;
}

}  // namespace agh
