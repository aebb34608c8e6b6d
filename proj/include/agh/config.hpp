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

// Experiment configuration: a flat "key=value" text file ('#' starts a
// comment) whose entries can be overridden by command-line flags of the same
// name. Precedence is flag > file > default; the seed additionally falls back
// to the AGH_SEED environment variable before the built-in default.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "agh/rba.hpp"
#include "agh/sah.hpp"

namespace agh {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Method { kGmpItq, kGmpRba, kSah };

Method parse_method(const std::string& name);
std::string method_name(Method method);
/// Filesystem-friendly tag ("gmp-itq", "gmp-rba", "sah").
std::string method_tag(Method method);

struct ExperimentConfig {
  Method method = Method::kSah;
  std::filesystem::path features;  // .manifest (local features) or .fvecs
  std::filesystem::path queries;
  std::filesystem::path ground_truth;
  std::filesystem::path out_dir = ".";
  std::vector<int> code_lengths{16};

  double lambda = 1e-2;
  /// Unset means the method default: 1 for gmp+rba, 1e-1 for sah.
  std::optional<double> beta;
  double gamma = 10.0;
  double mu = 100.0;
  int outer_iterations = 5;  // T
  int rba_iterations = 10;   // T1
  int b_sweeps = 1;
  int itq_iterations = kDefaultItqIterations;
  bool warm_start = false;
  bool normalize = false;
  std::optional<std::uint64_t> seed;
  int threads = 1;

  /// Sets one field from its textual form; throws ConfigError naming the key.
  void set(const std::string& key, const std::string& value);

  std::uint64_t resolved_seed() const;
  double resolved_beta() const;

  RbaHyperparams rba_hyperparams(int code_length) const;
  SahHyperparams sah_hyperparams(int code_length) const;

  /// Checks field ranges and that referenced input paths exist.
  void validate() const;

  static const std::vector<std::string>& keys();
};

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path);

/// Defaults, then `file` entries (if any), then `overrides` in order.
ExperimentConfig make_config(
    const std::optional<std::filesystem::path>& file,
    const std::vector<std::pair<std::string, std::string>>& overrides);

}  // namespace agh
