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

#include "agh/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace agh {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw ConfigError("config field '" + key + "': cannot parse '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError("config field '" + key + "': expected a boolean, got '" + value + "'");
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "gmp+itq" || name == "gmp-itq") return Method::kGmpItq;
  if (name == "gmp+rba" || name == "gmp-rba") return Method::kGmpRba;
  if (name == "sah") return Method::kSah;
  throw ConfigError("config field 'method': unknown method '" + name +
                    "' (expected gmp+itq, gmp+rba or sah)");
}

std::string method_name(Method method) {
  switch (method) {
    case Method::kGmpItq: return "gmp+itq";
    case Method::kGmpRba: return "gmp+rba";
    case Method::kSah: return "sah";
  }
  return "?";
}

std::string method_tag(Method method) {
  switch (method) {
    case Method::kGmpItq: return "gmp-itq";
    case Method::kGmpRba: return "gmp-rba";
    case Method::kSah: return "sah";
  }
  return "?";
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> k{
      "method", "features", "queries", "ground_truth", "out_dir",
      "code_lengths", "lambda", "beta", "gamma", "mu", "T", "T1", "b_sweeps",
      "itq_iterations", "warm_start", "normalize", "seed", "threads"};
  return k;
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "method") {
    method = parse_method(value);
  } else if (key == "features") {
    features = value;
  } else if (key == "queries") {
    queries = value;
  } else if (key == "ground_truth") {
    ground_truth = value;
  } else if (key == "out_dir") {
    out_dir = value;
  } else if (key == "code_lengths") {
    code_lengths.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
      code_lengths.push_back(parse_number<int>(key, trim(item)));
    if (code_lengths.empty()) throw ConfigError("config field 'code_lengths' is empty");
  } else if (key == "lambda") {
    lambda = parse_number<double>(key, value);
  } else if (key == "beta") {
    beta = parse_number<double>(key, value);
  } else if (key == "gamma") {
    gamma = parse_number<double>(key, value);
  } else if (key == "mu") {
    mu = parse_number<double>(key, value);
  } else if (key == "T") {
    outer_iterations = parse_number<int>(key, value);
  } else if (key == "T1") {
    rba_iterations = parse_number<int>(key, value);
  } else if (key == "b_sweeps") {
    b_sweeps = parse_number<int>(key, value);
  } else if (key == "itq_iterations") {
    itq_iterations = parse_number<int>(key, value);
  } else if (key == "warm_start") {
    warm_start = parse_bool(key, value);
  } else if (key == "normalize") {
    normalize = parse_bool(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threads") {
    threads = parse_number<int>(key, value);
  } else {
    throw ConfigError("unknown config field '" + key + "'");
  }
}

std::uint64_t ExperimentConfig::resolved_seed() const {
  if (seed) return *seed;
  if (const char* env = std::getenv("AGH_SEED"); env && *env)
    return parse_number<std::uint64_t>("AGH_SEED", env);
  return 0;
}

double ExperimentConfig::resolved_beta() const {
  if (beta) return *beta;
  return method == Method::kSah ? SahHyperparams{}.beta : RbaHyperparams{}.beta;
}

RbaHyperparams ExperimentConfig::rba_hyperparams(int code_length) const {
  RbaHyperparams hp;
  hp.lambda = lambda;
  hp.beta = resolved_beta();
  hp.iterations = rba_iterations;
  hp.code_length = code_length;
  hp.b_sweeps = b_sweeps;
  hp.itq_iterations = itq_iterations;
  return hp;
}

SahHyperparams ExperimentConfig::sah_hyperparams(int code_length) const {
  SahHyperparams hp;
  hp.lambda = lambda;
  hp.beta = resolved_beta();
  hp.gamma = gamma;
  hp.mu = mu;
  hp.outer_iterations = outer_iterations;
  hp.rba_iterations = rba_iterations;
  hp.code_length = code_length;
  hp.b_sweeps = b_sweeps;
  hp.itq_iterations = itq_iterations;
  hp.warm_start = warm_start;
  return hp;
}

void ExperimentConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(std::string("config field '") + name + "' must be positive");
  };
  positive(lambda, "lambda");
  positive(resolved_beta(), "beta");
  positive(gamma, "gamma");
  positive(mu, "mu");
  if (outer_iterations < 1) throw ConfigError("config field 'T' must be at least 1");
  if (rba_iterations < 1) throw ConfigError("config field 'T1' must be at least 1");
  if (b_sweeps < 1) throw ConfigError("config field 'b_sweeps' must be at least 1");
  if (itq_iterations < 1) throw ConfigError("config field 'itq_iterations' must be at least 1");
  if (threads < 1) throw ConfigError("config field 'threads' must be at least 1");
  if (code_lengths.empty()) throw ConfigError("config field 'code_lengths' is empty");
  for (int L : code_lengths)
    if (L < 1) throw ConfigError("config field 'code_lengths' must hold positive values");
  if (!features.empty() && !std::filesystem::exists(features))
    throw ConfigError("config field 'features': " + features.string() + " does not exist");
  if (!queries.empty() && !std::filesystem::exists(queries))
    throw ConfigError("config field 'queries': " + queries.string() + " does not exist");
  if (!ground_truth.empty() && !std::filesystem::exists(ground_truth))
    throw ConfigError("config field 'ground_truth': " + ground_truth.string() +
                      " does not exist");
}

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected key=value");
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

ExperimentConfig make_config(
    const std::optional<std::filesystem::path>& file,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig config;
  if (file)
    for (const auto& [key, value] : read_config_file(*file)) config.set(key, value);
  for (const auto& [key, value] : overrides) config.set(key, value);
  return config;
}

}  // namespace agh
