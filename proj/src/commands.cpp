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

#include "agh/commands.hpp"

#include <charconv>
#include <fstream>

#include "agh/data_io.hpp"
#include "agh/itq.hpp"
#include "agh/rba.hpp"
#include "agh/retrieval.hpp"
#include "agh/sah.hpp"

namespace agh {
namespace {

namespace fs = std::filesystem;

bool is_manifest(const fs::path& p) { return p.extension() == ".manifest"; }

std::ofstream open_text(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_labels(const std::vector<std::int32_t>& labels, const fs::path& path) {
  IntMatrix m(1, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = labels[i];
  write_ivecs(m, path);
}

void write_trace(const std::vector<double>& trace, const fs::path& path) {
  auto out = open_text(path);
  out << "iteration,objective\n";
  for (std::size_t t = 0; t < trace.size(); ++t)
    out << t + 1 << ',' << format_real(trace[t]) << '\n';
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void cmd_gen_synth(const SyntheticSpec& spec, int ground_truth_k, double mu,
                   const fs::path& out_dir) {
  const auto data = generate_synthetic(spec);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  save_local_features(data.database, out_dir / "database.manifest");
  save_local_features(data.queries, out_dir / "queries.manifest");
  write_labels(data.database_labels, out_dir / "database_labels.ivecs");
  write_labels(data.query_labels, out_dir / "query_labels.ivecs");
  if (ground_truth_k > 0) {
    const GmpParams gmp{mu};
    const auto gt = build_ground_truth(gmp_aggregate_all(data.queries, gmp),
                                       gmp_aggregate_all(data.database, gmp),
                                       ground_truth_k);
    write_ivecs(ground_truth_to_ivecs(gt), out_dir / "ground_truth.ivecs");
  }
}

DataMatrix load_vectors(const fs::path& path, double mu, bool normalize,
                        int threads) {
  DataMatrix x;
  if (is_manifest(path)) {
    x = gmp_aggregate_all(load_local_features(path), GmpParams{mu}, threads);
  } else {
    x = read_fvecs(path);
  }
  if (normalize) normalize_columns(x);
  return x;
}

void cmd_aggregate(const fs::path& manifest, const fs::path& out,
                   const GmpParams& params, bool normalize, int threads) {
  DataMatrix phi = gmp_aggregate_all(load_local_features(manifest), params, threads);
  if (normalize) normalize_columns(phi);
  write_fvecs(phi, out);
}

fs::path model_file(const fs::path& out_dir, Method method, int code_length) {
  return out_dir / ("model_" + method_tag(method) + "_L" +
                    std::to_string(code_length) + ".aghm");
}

std::vector<TrainArtifact> cmd_train(const ExperimentConfig& config) {
  config.validate();
  if (config.features.empty()) throw ConfigError("config field 'features' is required");
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + config.out_dir.string());
  const std::uint64_t seed = config.resolved_seed();

  std::vector<LocalFeatureSet> local;
  DataMatrix x;
  if (config.method == Method::kSah) {
    if (!is_manifest(config.features))
      throw ConfigError("config field 'features': sah needs a .manifest of local features");
    local = load_local_features(config.features);
  } else {
    x = load_vectors(config.features, config.mu, config.normalize, config.threads);
  }
  const int dim = config.method == Method::kSah
                      ? static_cast<int>(local.front().rows())
                      : static_cast<int>(x.rows());
  for (int L : config.code_lengths)
    if (L > dim)
      throw ConfigError("config field 'code_lengths': L=" + std::to_string(L) +
                        " exceeds feature dimension " + std::to_string(dim));

  std::vector<TrainArtifact> artifacts;
  for (int L : config.code_lengths) {
    TrainArtifact art;
    art.code_length = L;
    art.model = model_file(config.out_dir, config.method, L);
    art.trace = art.model;
    art.trace.replace_extension(".trace.csv");

    switch (config.method) {
      case Method::kGmpItq: {
        const auto itq = itq_train(x, L, config.itq_iterations, seed);
        save_model(hash_model_from_itq(itq.model), art.model);
        write_trace(itq.loss_trace, art.trace);
        break;
      }
      case Method::kGmpRba: {
        const auto fit = rba_train(x, config.rba_hyperparams(L), seed);
        save_model(fit.model, art.model);
        write_trace(fit.trace, art.trace);
        break;
      }
      case Method::kSah: {
        const auto hp = config.sah_hyperparams(L);
        const auto state = sah_train(local, hp, seed, config.threads);
        save_model(state.model, art.model);
        art.params = sah_params_path(art.model);
        save_sah_params(SahQueryParams{hp.gamma, hp.mu}, *art.params);

        std::vector<double> outer;
        for (const auto& rec : state.outer_trace) outer.push_back(rec.objective);
        write_trace(outer, art.trace);

        art.inner_trace = art.model;
        art.inner_trace->replace_extension(".inner.csv");
        auto out = open_text(*art.inner_trace);
        out << "outer,iteration,objective\n";
        for (std::size_t t = 0; t < state.outer_trace.size(); ++t) {
          const auto& inner = state.outer_trace[t].rba_trace;
          for (std::size_t i = 0; i < inner.size(); ++i)
            out << t + 1 << ',' << i + 1 << ',' << format_real(inner[i]) << '\n';
        }
        break;
      }
    }
    artifacts.push_back(std::move(art));
  }
  return artifacts;
}

BinaryCodeMatrix cmd_encode(const ExperimentConfig& config, const fs::path& model_path,
                            const fs::path& input, const fs::path& out) {
  const HashModel model = load_model(model_path);
  const auto sidecar = sah_params_path(model_path);
  BinaryCodeMatrix codes;
  if (fs::exists(sidecar)) {
    if (!is_manifest(input))
      throw ConfigError("SAH model " + model_path.string() +
                        " needs a .manifest of local features as input");
    const auto params = load_sah_params(sidecar);
    const auto local = load_local_features(input);
    if (!local.empty() && local.front().rows() != model.dim())
      throw std::invalid_argument("feature dimension " +
                                  std::to_string(local.front().rows()) +
                                  " does not match model dimension " +
                                  std::to_string(model.dim()));
    codes = sah_encode(local, model, params.gamma, params.mu, config.threads);
  } else {
    codes = rba_encode(load_vectors(input, config.mu, config.normalize, config.threads),
                       model);
  }
  write_code_file(codes, out);
  return codes;
}

EvalResult cmd_eval(const EvalOptions& options) {
  const auto q = read_code_file(options.query_codes);
  const auto db = read_code_file(options.db_codes);
  if (q.code_length != db.code_length)
    throw std::invalid_argument("query code length " + std::to_string(q.code_length) +
                                " differs from database code length " +
                                std::to_string(db.code_length));
  if (q.count == 0) throw std::invalid_argument("no query codes");
  const auto gt = ground_truth_from_ivecs(read_ivecs(options.ground_truth));
  if (gt.neighbors.size() != q.count)
    throw std::invalid_argument(std::to_string(q.count) + " query codes but " +
                                std::to_string(gt.neighbors.size()) +
                                " ground-truth lists");
  validate_ground_truth(gt, db.count);

  std::vector<std::int32_t> self_ids;
  if (options.self_ids) {
    const auto ids = read_ivecs(*options.self_ids, 1);
    self_ids.assign(ids.data(), ids.data() + ids.size());
  }
  const auto ranking = hamming_rank(unpack_codes(q.payload, q.code_length, q.count),
                                    unpack_codes(db.payload, db.code_length, db.count),
                                    options.truncation, self_ids, options.threads);
  EvalResult result;
  result.code_length = q.code_length;
  result.average_precisions = average_precisions(ranking, gt);
  result.map = mean_average_precision(ranking, gt);

  if (!options.report.empty()) {
    const bool fresh = !fs::exists(options.report) || fs::file_size(options.report) == 0;
    auto out = open_text(options.report, std::ios::app);
    if (fresh) out << "method,code_length,map\n";
    out << options.method << ',' << result.code_length << ',' << format_real(result.map)
        << '\n';
  }
  if (options.per_query) {
    auto out = open_text(*options.per_query);
    out << "query,ap\n";
    for (std::size_t i = 0; i < result.average_precisions.size(); ++i)
      out << i << ',' << format_real(result.average_precisions[i]) << '\n';
  }
  return result;
}

void cmd_ground_truth(const fs::path& queries, const fs::path& database, int k,
                      double mu, bool normalize, const fs::path& out, int threads) {
  const auto gt = build_ground_truth(load_vectors(queries, mu, normalize, threads),
                                     load_vectors(database, mu, normalize, threads), k,
                                     threads);
  write_ivecs(ground_truth_to_ivecs(gt), out);
}

}  // namespace agh
