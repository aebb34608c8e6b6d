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

// Iterative quantization: PCA to L dimensions, then an orthogonal rotation R
// learned by alternating  B = sgn(R V)  and the orthogonal Procrustes update
// of R, where V = P (X - mean 1^T). Used to produce the initial codes for
// autoencoder training and as a standalone baseline.

#include <cstdint>
#include <vector>

#include "agh/types.hpp"

namespace agh {

struct ItqModel {
  Vector mean;                // D
  Eigen::MatrixXd projection; // L x D, orthonormal rows
  Eigen::MatrixXd rotation;   // L x L, orthogonal

  int code_length() const { return static_cast<int>(rotation.rows()); }
  int dim() const { return static_cast<int>(mean.size()); }
};

struct ItqTraining {
  ItqModel model;
  /// ||B_t - R_t V||^2 after iteration t (codes from R_{t-1}, R_t from
  /// Procrustes on those codes).
  std::vector<double> loss_trace;
  /// Codes B_T used in the final rotation update.
  BinaryCodeMatrix codes;
};

inline constexpr int kDefaultItqIterations = 50;

ItqTraining itq_train(const DataMatrix& data, int code_length, int iterations,
                      std::uint64_t seed);

BinaryCodeMatrix itq_encode(const DataMatrix& data, const ItqModel& model);

/// ||sgn(R P Xc) - R P Xc||^2 for the given data.
double itq_quantization_loss(const DataMatrix& data, const ItqModel& model);

}  // namespace agh
