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

// agh: synthetic data generation, aggregation, training, encoding and
// retrieval evaluation for binary-autoencoder hashing.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "agh/commands.hpp"
#include "agh/config.hpp"

namespace {

// Registers --<key> (underscores spelled as dashes) for every config field.
struct ConfigFlags {
  std::optional<std::string> config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "key=value experiment config file");
    for (const auto& key : agh::ExperimentConfig::keys()) {
      std::string flag = key;
      for (auto& c : flag)
        if (c == '_') c = '-';
      cmd->add_option("--" + flag, values[key], "overrides config field '" + key + "'");
    }
  }

  agh::ExperimentConfig resolve(const CLI::App* cmd) const {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& key : agh::ExperimentConfig::keys()) {
      std::string flag = key;
      for (auto& c : flag)
        if (c == '_') c = '-';
      if (cmd->count("--" + flag) > 0) overrides.emplace_back(key, values.at(key));
    }
    std::optional<std::filesystem::path> file;
    if (config_file) file = *config_file;
    return agh::make_config(file, overrides);
  }
};

std::uint64_t seed_fallback() {
  if (const char* env = std::getenv("AGH_SEED"); env && *env)
    return std::stoull(env);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary autoencoder hashing with simultaneous feature aggregation"};
  app.require_subcommand(1);

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "write a clustered synthetic dataset");
  agh::SyntheticSpec spec;
  std::optional<std::uint64_t> gen_seed;
  std::string gen_out;
  int gt_k = 50;
  double gen_mu = 100.0;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--images", spec.image_count, "database image count")->capture_default_str();
  gen->add_option("--dim", spec.feature_dim, "local feature dimension")->capture_default_str();
  gen->add_option("--clusters", spec.clusters, "number of cluster centers")->capture_default_str();
  gen->add_option("--min-locals", spec.min_locals, "minimum local features per image")
      ->capture_default_str();
  gen->add_option("--max-locals", spec.max_locals, "maximum local features per image")
      ->capture_default_str();
  gen->add_option("--noise", spec.noise, "local feature noise scale")->capture_default_str();
  gen->add_option("--queries", spec.query_count, "query image count")->capture_default_str();
  gen->add_option("--seed", gen_seed, "random seed (falls back to AGH_SEED)");
  gen->add_option("--gt-k", gt_k, "ground-truth neighbors per query, 0 to skip")
      ->capture_default_str();
  gen->add_option("--mu", gen_mu, "GMP regularizer for the ground truth")->capture_default_str();

  // aggregate
  auto* agg = app.add_subcommand("aggregate", "GMP-aggregate a local feature manifest");
  std::string agg_manifest, agg_out;
  double agg_mu = 100.0;
  bool agg_normalize = false;
  int agg_threads = 1;
  agg->add_option("--manifest", agg_manifest, "local feature manifest")->required();
  agg->add_option("--out", agg_out, "output fvecs")->required();
  agg->add_option("--mu", agg_mu, "GMP regularizer")->capture_default_str();
  agg->add_flag("--normalize", agg_normalize, "l2-normalize aggregated vectors");
  agg->add_option("--threads", agg_threads, "worker threads")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "train gmp+itq, gmp+rba or sah models");
  ConfigFlags train_flags;
  train_flags.attach(train);

  // encode
  auto* encode = app.add_subcommand("encode", "encode features into a packed code file");
  ConfigFlags encode_flags;
  encode_flags.attach(encode);
  std::string enc_model, enc_input, enc_out;
  encode->add_option("--model", enc_model, "model file")->required();
  encode->add_option("--input", enc_input, ".manifest or .fvecs input")->required();
  encode->add_option("--out", enc_out, "output code file")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Hamming ranking and mAP");
  agh::EvalOptions eval_opts;
  std::string eval_report, eval_per_query, eval_self_ids;
  eval->add_option("--query-codes", eval_opts.query_codes, "query code file")->required();
  eval->add_option("--db-codes", eval_opts.db_codes, "database code file")->required();
  eval->add_option("--ground-truth", eval_opts.ground_truth, "ground truth ivecs")->required();
  eval->add_option("--top-k", eval_opts.truncation, "truncate rankings, 0 keeps all")
      ->capture_default_str();
  eval->add_option("--method", eval_opts.method, "method label for the report")
      ->capture_default_str();
  eval->add_option("--report", eval_report, "mAP report CSV (appended)");
  eval->add_option("--per-query", eval_per_query, "per-query AP CSV");
  eval->add_option("--self-ids", eval_self_ids, "ivecs of database ids to drop per query");
  eval->add_option("--threads", eval_opts.threads, "worker threads")->capture_default_str();

  // ground-truth
  auto* gtc = app.add_subcommand("ground-truth", "exact Euclidean k-NN ground truth");
  std::string gt_queries, gt_db, gt_out;
  int gt_kk = 50, gt_threads = 1;
  double gt_mu = 100.0;
  bool gt_normalize = false;
  gtc->add_option("--queries", gt_queries, ".manifest or .fvecs queries")->required();
  gtc->add_option("--database", gt_db, ".manifest or .fvecs database")->required();
  gtc->add_option("--k", gt_kk, "neighbors per query")->capture_default_str();
  gtc->add_option("--mu", gt_mu, "GMP regularizer for .manifest inputs")->capture_default_str();
  gtc->add_flag("--normalize", gt_normalize, "l2-normalize vectors first");
  gtc->add_option("--out", gt_out, "output ivecs")->required();
  gtc->add_option("--threads", gt_threads, "worker threads")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      spec.seed = gen_seed ? *gen_seed : seed_fallback();
      agh::cmd_gen_synth(spec, gt_k, gen_mu, gen_out);
    } else if (*agg) {
      agh::cmd_aggregate(agg_manifest, agg_out, agh::GmpParams{agg_mu}, agg_normalize,
                         agg_threads);
    } else if (*train) {
      const auto config = train_flags.resolve(train);
      for (const auto& art : agh::cmd_train(config))
        std::cout << "L=" << art.code_length << " model=" << art.model.string()
                  << " trace=" << art.trace.string() << '\n';
    } else if (*encode) {
      const auto config = encode_flags.resolve(encode);
      const auto codes = agh::cmd_encode(config, enc_model, enc_input, enc_out);
      std::cout << "encoded " << codes.cols() << " items with L=" << codes.rows() << '\n';
    } else if (*eval) {
      if (!eval_report.empty()) eval_opts.report = eval_report;
      if (!eval_per_query.empty()) eval_opts.per_query = eval_per_query;
      if (!eval_self_ids.empty()) eval_opts.self_ids = eval_self_ids;
      const auto result = agh::cmd_eval(eval_opts);
      std::cout << eval_opts.method << ',' << result.code_length << ','
                << agh::format_real(result.map) << '\n';
    } else if (*gtc) {
      agh::cmd_ground_truth(gt_queries, gt_db, gt_kk, gt_mu, gt_normalize, gt_out,
                            gt_threads);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
