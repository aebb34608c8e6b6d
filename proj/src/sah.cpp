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

#include "agh/sah.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include "agh/aggregation.hpp"

namespace agh {
namespace {

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(name) + " must be positive and finite");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void SahHyperparams::validate() const {
  check_positive(lambda, "lambda");
  check_positive(beta, "beta");
  check_positive(gamma, "gamma");
  check_positive(mu, "mu");
  if (outer_iterations < 1) throw std::invalid_argument("T must be at least 1");
  rba().validate();
}

RbaHyperparams SahHyperparams::rba() const {
  RbaHyperparams hp;
  hp.lambda = lambda;
  hp.beta = beta;
  hp.iterations = rba_iterations;
  hp.code_length = code_length;
  hp.b_sweeps = b_sweeps;
  hp.itq_iterations = itq_iterations;
  return hp;
}

PhiSolver::PhiSolver(const HashModel& model, double gamma, double mu)
    : gamma_(gamma) {
  model.validate();
  check_positive(gamma, "gamma");
  check_positive(mu, "mu");
  const Eigen::Index D = model.dim();
  const Eigen::MatrixXd residual =
      Eigen::MatrixXd::Identity(D, D) - model.W2 * model.W1;
  base_ = residual.transpose() * residual;
  base_.diagonal().array() += gamma * mu;
  offset_ = residual.transpose() * (model.W2 * model.c1 + model.c2);
}

Vector PhiSolver::solve(const LocalFeatureSet& local) const {
  if (local.rows() != base_.rows())
    throw std::invalid_argument("Phi-step: local features have dimension " +
                                std::to_string(local.rows()) + ", model has " +
                                std::to_string(base_.rows()));
  if (local.cols() < 1) throw std::invalid_argument("Phi-step: image has no local features");
  if (!local.allFinite()) throw NumericalError("Phi-step: non-finite local features");

  Eigen::MatrixXd a = base_;
  a.selfadjointView<Eigen::Lower>().rankUpdate(local, gamma_);
  const Vector rhs = gamma_ * local.rowwise().sum() + offset_;
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericalError("Phi-step system is not positive definite");
  Vector phi = llt.solve(rhs);
  if (!phi.allFinite()) throw NumericalError("Phi-step produced non-finite values");
  return phi;
}

Vector phi_step(const LocalFeatureSet& local, const HashModel& model,
                double gamma, double mu) {
  return PhiSolver(model, gamma, mu).solve(local);
}

DataMatrix phi_step_all(const std::vector<LocalFeatureSet>& dataset,
                        const HashModel& model, double gamma, double mu,
                        int threads) {
  const PhiSolver solver(model, gamma, mu);
  DataMatrix phi(model.dim(), static_cast<Eigen::Index>(dataset.size()));
  parallel_for(dataset.size(), threads, [&](std::size_t i) {
    try {
      phi.col(static_cast<Eigen::Index>(i)) = solver.solve(dataset[i]);
    } catch (const NumericalError& e) {
      throw NumericalError("image " + std::to_string(i) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("image " + std::to_string(i) + ": " + e.what());
    }
  });
  return phi;
}

double phi_objective(const LocalFeatureSet& local, const Vector& phi,
                     const HashModel& model, double gamma, double mu) {
  const Vector recon = model.W2 * (model.W1 * phi + model.c1) + model.c2;
  const Eigen::VectorXd sims = local.transpose() * phi;
  return 0.5 * (phi - recon).squaredNorm() +
         0.5 * gamma * ((sims.array() - 1.0).matrix().squaredNorm() +
                        mu * phi.squaredNorm());
}

double sah_objective(const std::vector<LocalFeatureSet>& dataset,
                     const DataMatrix& phi, const HashModel& model, double beta,
                     double gamma, double mu) {
  if (phi.cols() != static_cast<Eigen::Index>(dataset.size()) ||
      phi.rows() != model.dim())
    throw std::invalid_argument("SAH objective: shape mismatch");
  const Eigen::MatrixXd recon =
      (model.W2 * ((model.W1 * phi).colwise() + model.c1)).colwise() + model.c2;
  double aggregation = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto col = phi.col(static_cast<Eigen::Index>(i));
    const Eigen::VectorXd sims = dataset[i].transpose() * col;
    aggregation += (sims.array() - 1.0).matrix().squaredNorm() + mu * col.squaredNorm();
  }
  return 0.5 * (phi - recon).squaredNorm() +
         0.5 * beta * (model.W1.squaredNorm() + model.W2.squaredNorm()) +
         0.5 * gamma * aggregation;
}

SahState sah_train(const std::vector<LocalFeatureSet>& dataset,
                   const SahHyperparams& hp, std::uint64_t seed, int threads,
                   const SahObserver& observer) {
  hp.validate();
  if (dataset.empty()) throw std::invalid_argument("SAH needs at least one image");

  SahState state;
  state.phi = gmp_aggregate_all(dataset, GmpParams{hp.mu}, threads);
  const RbaHyperparams rba_hp = hp.rba();
  BinaryCodeMatrix previous_codes;

  for (int t = 1; t <= hp.outer_iterations; ++t) {
    RbaTraining fit;
    try {
      fit = rba_train(state.phi, rba_hp, seed,
                      hp.warm_start && t > 1 ? &previous_codes : nullptr);
    } catch (const NumericalError& e) {
      throw NumericalError("SAH outer iteration " + std::to_string(t) + ", " +
                           e.what());
    }
    state.model = std::move(fit.model);
    previous_codes = std::move(fit.codes);

    DataMatrix next;
    try {
      next = phi_step_all(dataset, state.model, hp.gamma, hp.mu, threads);
    } catch (const NumericalError& e) {
      throw NumericalError("SAH outer iteration " + std::to_string(t) +
                           ", Phi-step: " + e.what());
    }
    if (observer) observer(PhiUpdate{t, state.phi, next, state.model});
    state.phi = std::move(next);

    SahIteration record;
    record.objective =
        sah_objective(dataset, state.phi, state.model, hp.beta, hp.gamma, hp.mu);
    record.rba_trace = std::move(fit.trace);
    if (!std::isfinite(record.objective))
      throw NumericalError("SAH outer iteration " + std::to_string(t) +
                           ": objective is not finite");
    state.outer_trace.push_back(std::move(record));
  }
  return state;
}

Vector sah_encode_image(const LocalFeatureSet& local, const HashModel& model,
                        double gamma, double mu) {
  const Vector phi = phi_step(local, model, gamma, mu);
  return sign_matrix(model.W1 * phi + model.c1);
}

BinaryCodeMatrix sah_encode(const std::vector<LocalFeatureSet>& dataset,
                            const HashModel& model, double gamma, double mu,
                            int threads) {
  return rba_encode(phi_step_all(dataset, model, gamma, mu, threads), model);
}

double sah_reconstruction_error(const std::vector<LocalFeatureSet>& dataset,
                                const HashModel& model, double gamma, double mu,
                                int threads) {
  const DataMatrix phi = phi_step_all(dataset, model, gamma, mu, threads);
  return mean_squared_error(phi, reconstruct(rba_encode(phi, model), model));
}

std::filesystem::path sah_params_path(const std::filesystem::path& model_path) {
  auto p = model_path;
  p += ".params";
  return p;
}

void save_sah_params(const SahQueryParams& params,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "gamma=" << format_double(params.gamma) << '\n'
      << "mu=" << format_double(params.mu) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

SahQueryParams load_sah_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  SahQueryParams params;
  bool have_gamma = false, have_mu = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path.string() + ": malformed line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    double v = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size())
      throw std::runtime_error(path.string() + ": bad number for " + key);
    if (key == "gamma") {
      params.gamma = v;
      have_gamma = true;
    } else if (key == "mu") {
      params.mu = v;
      have_mu = true;
    } else {
      throw std::runtime_error(path.string() + ": unknown key " + key);
    }
  }
  if (!have_gamma || !have_mu)
    throw std::runtime_error(path.string() + ": gamma and mu are required");
  check_positive(params.gamma, "gamma");
  check_positive(params.mu, "mu");
  return params;
}

}  // namespace agh
