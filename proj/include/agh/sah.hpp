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

// Simultaneous aggregating and hashing. Alternates between
//
//   (W,c)-step  autoencoder training on the current aggregated vectors Phi;
//   Phi-step    per image, the minimizer of
//                 1/2 ||phi - (W2 (W1 phi + c1) + c2)||^2
//                   + gamma/2 (||V^T phi - 1||^2 + mu ||phi||^2),
//
// starting from generalized max pooling. Queries are aggregated with the same
// Phi-step (same gamma, mu) and then passed through the encoder.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "agh/rba.hpp"
#include "agh/types.hpp"

namespace agh {

struct SahHyperparams {
  double lambda = 1e-2;
  double beta = 1e-1;
  double gamma = 10.0;
  double mu = 100.0;
  int outer_iterations = 5;  // T
  int rba_iterations = 10;   // T1
  int code_length = 16;
  int b_sweeps = 1;
  int itq_iterations = kDefaultItqIterations;
  /// Reuse the previous outer iteration's codes instead of re-running ITQ.
  bool warm_start = false;

  void validate() const;
  RbaHyperparams rba() const;
};

/// Holds (I - W2 W1)^T (I - W2 W1) + gamma mu I and (I - W2 W1)^T (W2 c1 + c2),
/// which are shared by every image for a fixed model.
class PhiSolver {
 public:
  PhiSolver(const HashModel& model, double gamma, double mu);

  Vector solve(const LocalFeatureSet& local) const;

 private:
  double gamma_;
  Eigen::MatrixXd base_;
  Vector offset_;
};

Vector phi_step(const LocalFeatureSet& local, const HashModel& model,
                double gamma, double mu);

DataMatrix phi_step_all(const std::vector<LocalFeatureSet>& dataset,
                        const HashModel& model, double gamma, double mu,
                        int threads = 1);

/// Per-image objective minimized by the Phi-step.
double phi_objective(const LocalFeatureSet& local, const Vector& phi,
                     const HashModel& model, double gamma, double mu);

/// Joint objective with the binary constraint dropped:
///   1/2 ||Phi - (W2 (W1 Phi + c1 1^T) + c2 1^T)||^2
///     + beta/2 (||W1||^2 + ||W2||^2)
///     + gamma/2 sum_i (||V_i^T phi_i - 1||^2 + mu ||phi_i||^2).
double sah_objective(const std::vector<LocalFeatureSet>& dataset,
                     const DataMatrix& phi, const HashModel& model, double beta,
                     double gamma, double mu);

struct SahIteration {
  double objective = 0.0;
  std::vector<double> rba_trace;
};

struct SahState {
  DataMatrix phi;
  HashModel model;
  std::vector<SahIteration> outer_trace;
};

/// Passed to the observer after each Phi-step.
struct PhiUpdate {
  int iteration;  // 1-based outer iteration
  const DataMatrix& previous;
  const DataMatrix& current;
  const HashModel& model;
};

using SahObserver = std::function<void(const PhiUpdate&)>;

SahState sah_train(const std::vector<LocalFeatureSet>& dataset,
                   const SahHyperparams& hp, std::uint64_t seed,
                   int threads = 1, const SahObserver& observer = {});

Vector sah_encode_image(const LocalFeatureSet& local, const HashModel& model,
                        double gamma, double mu);

BinaryCodeMatrix sah_encode(const std::vector<LocalFeatureSet>& dataset,
                            const HashModel& model, double gamma, double mu,
                            int threads = 1);

/// Mean over images of ||phi_i - (W2 z_i + c2)||^2, with phi_i from the
/// Phi-step and z_i = sgn(W1 phi_i + c1).
double sah_reconstruction_error(const std::vector<LocalFeatureSet>& dataset,
                                const HashModel& model, double gamma, double mu,
                                int threads = 1);

struct SahQueryParams {
  double gamma = 10.0;
  double mu = 100.0;
};

/// Sidecar next to a model file: "<model>.params", lines "gamma=..", "mu=..".
std::filesystem::path sah_params_path(const std::filesystem::path& model_path);
void save_sah_params(const SahQueryParams& params,
                     const std::filesystem::path& path);
SahQueryParams load_sah_params(const std::filesystem::path& path);

}  // namespace agh
