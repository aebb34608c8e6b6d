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

// Library side of the command-line tool. Each cmd_* function performs one
// subcommand end to end so it can be exercised directly from tests.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "agh/aggregation.hpp"
#include "agh/config.hpp"
#include "agh/synth.hpp"

namespace agh {

/// Writes database.{manifest,fvecs}, queries.{manifest,fvecs},
/// database_labels.ivecs, query_labels.ivecs and, when ground_truth_k > 0,
/// ground_truth.ivecs (k nearest database GMP vectors of each query GMP
/// vector, with regularizer `mu`).
void cmd_gen_synth(const SyntheticSpec& spec, int ground_truth_k, double mu,
                   const std::filesystem::path& out_dir);

void cmd_aggregate(const std::filesystem::path& manifest,
                   const std::filesystem::path& out, const GmpParams& params,
                   bool normalize, int threads);

/// One vector per column: GMP-aggregated when `path` is a .manifest, read as
/// is otherwise.
DataMatrix load_vectors(const std::filesystem::path& path, double mu,
                        bool normalize, int threads);

struct TrainArtifact {
  int code_length = 0;
  std::filesystem::path model;
  std::filesystem::path trace;  // iteration,objective
  std::optional<std::filesystem::path> inner_trace;  // sah: outer,iteration,objective
  std::optional<std::filesystem::path> params;       // sah sidecar
};

std::filesystem::path model_file(const std::filesystem::path& out_dir,
                                 Method method, int code_length);

std::vector<TrainArtifact> cmd_train(const ExperimentConfig& config);

/// Encodes `input` with the model and writes a code file. Models with a
/// gamma/mu sidecar are SAH models and need a .manifest input.
BinaryCodeMatrix cmd_encode(const ExperimentConfig& config,
                            const std::filesystem::path& model,
                            const std::filesystem::path& input,
                            const std::filesystem::path& out);

struct EvalOptions {
  std::filesystem::path query_codes;
  std::filesystem::path db_codes;
  std::filesystem::path ground_truth;
  std::size_t truncation = 0;
  std::string method = "unknown";
  std::filesystem::path report;  // method,code_length,map (appended)
  std::optional<std::filesystem::path> per_query;  // query,ap
  std::optional<std::filesystem::path> self_ids;   // ivecs, one id per query
  int threads = 1;
};

struct EvalResult {
  int code_length = 0;
  double map = 0.0;
  std::vector<double> average_precisions;
};

EvalResult cmd_eval(const EvalOptions& options);

void cmd_ground_truth(const std::filesystem::path& queries,
                      const std::filesystem::path& database, int k, double mu,
                      bool normalize, const std::filesystem::path& out,
                      int threads);

/// Shortest round-trip decimal form.
std::string format_real(double v);

}  // namespace agh
