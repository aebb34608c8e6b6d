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

// Relaxed binary autoencoder. Training minimizes
//
//   1/2 ||X - (W2 B + c2 1^T)||^2 + lambda/2 ||B - (W1 X + c1 1^T)||^2
//     + beta/2 (||W1||^2 + ||W2||^2),      B in {-1,+1}^{L x m}
//
// by alternating exact minimization over (W1, W2), (c1, c2) and B. The encoder
// at query time is sgn(W1 x + c1) and the decoder is W2 z + c2.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "agh/itq.hpp"
#include "agh/types.hpp"

namespace agh {

struct HashModel {
  Eigen::MatrixXd W1;  // L x D
  Vector c1;           // L
  Eigen::MatrixXd W2;  // D x L
  Vector c2;           // D

  int code_length() const { return static_cast<int>(W1.rows()); }
  int dim() const { return static_cast<int>(W1.cols()); }

  static HashModel zeros(int code_length, int dim);
  /// Throws std::invalid_argument on inconsistent shapes and NumericalError on
  /// non-finite entries.
  void validate() const;
};

struct RbaHyperparams {
  double lambda = 1e-2;
  double beta = 1.0;
  int iterations = 10;  // T1
  int code_length = 16;
  int b_sweeps = 1;
  int itq_iterations = kDefaultItqIterations;

  void validate() const;
};

/// Caches X^T (lambda X X^T + beta I)^{-1}, which stays fixed while B and c1
/// change during training, and applies the encoder weight update
///   W1 = lambda (B - c1 1^T) X^T (lambda X X^T + beta I)^{-1}.
class EncoderSolver {
 public:
  EncoderSolver(const DataMatrix& data, double lambda, double beta);

  Eigen::MatrixXd solve(const BinaryCodeMatrix& codes, const Vector& c1) const;

  /// Number of EncoderSolver constructions in this process.
  static std::size_t instances_built();

 private:
  double lambda_;
  Eigen::MatrixXd gain_;    // m x D
  Eigen::RowVectorXd gain_colsum_;  // 1^T gain_
};

Eigen::MatrixXd update_encoder_weights(const DataMatrix& data,
                                       const BinaryCodeMatrix& codes,
                                       const Vector& c1, double lambda,
                                       double beta);

/// W2 = (X - c2 1^T) B^T (B B^T + beta I)^{-1}.
Eigen::MatrixXd update_decoder_weights(const DataMatrix& data,
                                       const BinaryCodeMatrix& codes,
                                       const Vector& c2, double beta);

/// c1 = mean of columns of (B - W1 X), c2 = mean of columns of (X - W2 B).
std::pair<Vector, Vector> update_biases(const DataMatrix& data,
                                        const BinaryCodeMatrix& codes,
                                        const Eigen::MatrixXd& W1,
                                        const Eigen::MatrixXd& W2);

/// ||X - c2 1^T - W2 B||^2 + lambda ||W1 X + c1 1^T - B||^2, the part of the
/// training objective that depends on B (times two).
double b_step_objective(const DataMatrix& data, const HashModel& model,
                        const BinaryCodeMatrix& codes, double lambda);

/// Quantities fixed during one B-step: X~ = X - c2 1^T, H = W1 X + c1 1^T,
/// Q = W2^T X~ + lambda H and the Gram matrix W2^T W2.
class BStepWorkspace {
 public:
  BStepWorkspace(const DataMatrix& data, const HashModel& model, double lambda);

  /// Replaces row k of `codes` by sgn(q_k^T - w_k^T W2' B'), where the primes
  /// drop column/row k. Returns whether any entry changed.
  bool update_row(BinaryCodeMatrix& codes, Eigen::Index k) const;

  /// ||X~ - W2 B||^2 + lambda ||H - B||^2.
  double objective(const BinaryCodeMatrix& codes) const;

  Eigen::Index code_length() const { return q_.rows(); }
  Eigen::Index samples() const { return q_.cols(); }

 private:
  double lambda_;
  Eigen::MatrixXd x_tilde_;
  Eigen::MatrixXd h_;
  Eigen::MatrixXd q_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd w2_;
};

/// Coordinate descent over the rows of B, k = 0..L-1 per sweep. Each row gets
/// its exact minimizer given the others. Stops after `sweeps` sweeps or after
/// a sweep that changes nothing. `sweeps_done`, when given, receives the
/// number of sweeps performed.
BinaryCodeMatrix b_step(const DataMatrix& data, const HashModel& model,
                        const BinaryCodeMatrix& initial, double lambda,
                        int sweeps, int* sweeps_done = nullptr);

double rba_objective(const DataMatrix& data, const HashModel& model,
                     const BinaryCodeMatrix& codes, double lambda, double beta);

struct RbaTraining {
  HashModel model;
  BinaryCodeMatrix codes;
  /// Objective value after each full W/c/B iteration.
  std::vector<double> trace;
};

/// Trains from ITQ-initialized codes, or from `warm_start` when given.
RbaTraining rba_train(const DataMatrix& data, const RbaHyperparams& hp,
                      std::uint64_t seed,
                      const BinaryCodeMatrix* warm_start = nullptr);

BinaryCodeMatrix rba_encode(const DataMatrix& data, const HashModel& model);

/// W2 Z + c2 1^T.
DataMatrix reconstruct(const BinaryCodeMatrix& codes, const HashModel& model);

/// (1/m) sum_i ||x_i - y_i||^2.
double mean_squared_error(const DataMatrix& x, const DataMatrix& y);

/// Affine encoder/decoder equivalent to an ITQ model: W1 = R P,
/// c1 = -R P mean, W2 = (R P)^T, c2 = mean.
HashModel hash_model_from_itq(const ItqModel& itq);

// Binary model file: "AGHM", u32 L, u32 D, then little-endian float64 values
// of W1 (row-major), c1, W2 (row-major), c2.
void save_model(const HashModel& model, const std::filesystem::path& path);
HashModel load_model(const std::filesystem::path& path);

}  // namespace agh
