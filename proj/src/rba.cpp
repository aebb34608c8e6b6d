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

#include "agh/rba.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace agh {
namespace {

std::atomic<std::size_t> g_encoder_solvers{0};

constexpr char kModelMagic[4] = {'A', 'G', 'H', 'M'};

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(name) + " must be positive and finite");
}

void check_codes(const BinaryCodeMatrix& codes, const char* what) {
  if (!is_binary(codes))
    throw std::invalid_argument(std::string(what) + " has entries outside {-1,+1}");
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite())
    throw NumericalError(std::string(what) + " contains non-finite values");
}

Eigen::LLT<Eigen::MatrixXd> factor_spd(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string(what) + " is not positive definite");
  return llt;
}

}  // namespace

HashModel HashModel::zeros(int code_length, int dim) {
  return {Eigen::MatrixXd::Zero(code_length, dim), Vector::Zero(code_length),
          Eigen::MatrixXd::Zero(dim, code_length), Vector::Zero(dim)};
}

void HashModel::validate() const {
  const auto L = W1.rows();
  const auto D = W1.cols();
  if (L < 1 || D < 1 || c1.size() != L || W2.rows() != D || W2.cols() != L ||
      c2.size() != D)
    throw std::invalid_argument("hash model has inconsistent shapes");
  if (!W1.allFinite() || !c1.allFinite() || !W2.allFinite() || !c2.allFinite())
    throw NumericalError("hash model contains non-finite values");
}

void RbaHyperparams::validate() const {
  check_positive(lambda, "lambda");
  check_positive(beta, "beta");
  if (iterations < 1) throw std::invalid_argument("T1 must be at least 1");
  if (code_length < 1) throw std::invalid_argument("code length must be at least 1");
  if (b_sweeps < 1) throw std::invalid_argument("B-step sweeps must be at least 1");
  if (itq_iterations < 1) throw std::invalid_argument("ITQ iterations must be at least 1");
}

EncoderSolver::EncoderSolver(const DataMatrix& data, double lambda, double beta)
    : lambda_(lambda) {
  check_positive(lambda, "lambda");
  check_positive(beta, "beta");
  check_finite(data, "training data");
  const Eigen::Index D = data.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(D, D) * beta;
  a.selfadjointView<Eigen::Lower>().rankUpdate(data, lambda);
  a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
  const auto llt = factor_spd(a, "lambda X X^T + beta I");
  gain_ = llt.solve(data).transpose();
  gain_colsum_ = gain_.colwise().sum();
  ++g_encoder_solvers;
}

Eigen::MatrixXd EncoderSolver::solve(const BinaryCodeMatrix& codes,
                                     const Vector& c1) const {
  if (codes.cols() != gain_.rows() || c1.size() != codes.rows())
    throw std::invalid_argument("encoder update: shape mismatch");
  return lambda_ * (codes * gain_ - c1 * gain_colsum_);
}

std::size_t EncoderSolver::instances_built() { return g_encoder_solvers.load(); }

Eigen::MatrixXd update_encoder_weights(const DataMatrix& data,
                                       const BinaryCodeMatrix& codes,
                                       const Vector& c1, double lambda,
                                       double beta) {
  if (codes.cols() != data.cols())
    throw std::invalid_argument("encoder update: B and X column counts differ");
  check_finite(codes, "B");
  check_finite(c1, "c1");
  return EncoderSolver(data, lambda, beta).solve(codes, c1);
}

Eigen::MatrixXd update_decoder_weights(const DataMatrix& data,
                                       const BinaryCodeMatrix& codes,
                                       const Vector& c2, double beta) {
  check_positive(beta, "beta");
  if (codes.cols() != data.cols() || c2.size() != data.rows())
    throw std::invalid_argument("decoder update: shape mismatch");
  check_finite(data, "training data");
  check_finite(codes, "B");
  check_finite(c2, "c2");
  const Eigen::Index L = codes.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(L, L) * beta;
  a.noalias() += codes * codes.transpose();
  const auto llt = factor_spd(a, "B B^T + beta I");
  // (B B^T + beta I) W2^T = B (X - c2 1^T)^T
  const Eigen::MatrixXd rhs = codes * (data.colwise() - c2).transpose();
  return llt.solve(rhs).transpose();
}

std::pair<Vector, Vector> update_biases(const DataMatrix& data,
                                        const BinaryCodeMatrix& codes,
                                        const Eigen::MatrixXd& W1,
                                        const Eigen::MatrixXd& W2) {
  const Eigen::Index m = data.cols();
  if (m == 0) throw std::invalid_argument("bias update needs at least one sample");
  if (codes.cols() != m || W1.rows() != codes.rows() || W1.cols() != data.rows() ||
      W2.rows() != data.rows() || W2.cols() != codes.rows())
    throw std::invalid_argument("bias update: shape mismatch");
  Vector c1 = (codes - W1 * data).rowwise().mean();
  Vector c2 = (data - W2 * codes).rowwise().mean();
  return {std::move(c1), std::move(c2)};
}

BStepWorkspace::BStepWorkspace(const DataMatrix& data, const HashModel& model,
                               double lambda)
    : lambda_(lambda) {
  model.validate();
  check_positive(lambda, "lambda");
  if (data.rows() != model.dim())
    throw std::invalid_argument("B-step: data dimension does not match model");
  x_tilde_ = data.colwise() - model.c2;
  h_ = (model.W1 * data).colwise() + model.c1;
  q_ = model.W2.transpose() * x_tilde_ + lambda * h_;
  gram_ = model.W2.transpose() * model.W2;
  w2_ = model.W2;
}

bool BStepWorkspace::update_row(BinaryCodeMatrix& codes, Eigen::Index k) const {
  // w_k^T W2' B' = g_k^T B - g_kk b_k^T with G = W2^T W2, so each row costs
  // O(mL) and nothing is materialized.
  const Eigen::RowVectorXd excluded =
      gram_.row(k) * codes - gram_(k, k) * codes.row(k);
  bool changed = false;
  for (Eigen::Index i = 0; i < codes.cols(); ++i) {
    const double v = sign_of(q_(k, i) - excluded(i));
    if (v != codes(k, i)) {
      codes(k, i) = v;
      changed = true;
    }
  }
  return changed;
}

double BStepWorkspace::objective(const BinaryCodeMatrix& codes) const {
  return (x_tilde_ - w2_ * codes).squaredNorm() + lambda_ * (h_ - codes).squaredNorm();
}

double b_step_objective(const DataMatrix& data, const HashModel& model,
                        const BinaryCodeMatrix& codes, double lambda) {
  return BStepWorkspace(data, model, lambda).objective(codes);
}

BinaryCodeMatrix b_step(const DataMatrix& data, const HashModel& model,
                        const BinaryCodeMatrix& initial, double lambda,
                        int sweeps, int* sweeps_done) {
  if (sweeps < 1) throw std::invalid_argument("B-step sweeps must be at least 1");
  const BStepWorkspace workspace(data, model, lambda);
  if (initial.rows() != workspace.code_length() || initial.cols() != workspace.samples())
    throw std::invalid_argument("B-step: initial codes have the wrong shape");
  check_codes(initial, "initial B");

  BinaryCodeMatrix codes = initial;
  int done = 0;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    ++done;
    bool changed = false;
    for (Eigen::Index k = 0; k < workspace.code_length(); ++k)
      changed = workspace.update_row(codes, k) || changed;
    if (!changed) break;
  }
  if (sweeps_done) *sweeps_done = done;
  return codes;
}

double rba_objective(const DataMatrix& data, const HashModel& model,
                     const BinaryCodeMatrix& codes, double lambda, double beta) {
  if (data.rows() != model.dim() || codes.rows() != model.code_length() ||
      codes.cols() != data.cols() || model.c1.size() != model.code_length() ||
      model.c2.size() != model.dim() || model.W2.rows() != model.dim() ||
      model.W2.cols() != model.code_length())
    throw std::invalid_argument("objective: shape mismatch");
  const double reconstruction =
      ((data - model.W2 * codes).colwise() - model.c2).squaredNorm();
  const double quantization =
      (codes - ((model.W1 * data).colwise() + model.c1)).squaredNorm();
  return 0.5 * reconstruction + 0.5 * lambda * quantization +
         0.5 * beta * (model.W1.squaredNorm() + model.W2.squaredNorm());
}

RbaTraining rba_train(const DataMatrix& data, const RbaHyperparams& hp,
                      std::uint64_t seed, const BinaryCodeMatrix* warm_start) {
  hp.validate();
  const int L = hp.code_length;
  const auto D = data.rows();
  const auto m = data.cols();
  if (L > D)
    throw std::invalid_argument("code length " + std::to_string(L) +
                                " exceeds feature dimension " + std::to_string(D));
  if (m < L)
    throw std::invalid_argument("need at least L=" + std::to_string(L) +
                                " training samples for ITQ initialization, got " +
                                std::to_string(m) + "; reduce the code length");
  check_finite(data, "training data");

  RbaTraining out;
  if (warm_start) {
    if (warm_start->rows() != L || warm_start->cols() != m)
      throw std::invalid_argument("warm-start codes have the wrong shape");
    check_codes(*warm_start, "warm-start B");
    out.codes = *warm_start;
  } else {
    const auto itq = itq_train(data, L, hp.itq_iterations, seed);
    out.codes = itq_encode(data, itq.model);
  }

  HashModel& model = out.model;
  model = HashModel::zeros(L, static_cast<int>(D));
  const EncoderSolver encoder(data, hp.lambda, hp.beta);

  out.trace.reserve(static_cast<std::size_t>(hp.iterations));
  for (int t = 1; t <= hp.iterations; ++t) {
    model.W1 = encoder.solve(out.codes, model.c1);
    model.W2 = update_decoder_weights(data, out.codes, model.c2, hp.beta);
    std::tie(model.c1, model.c2) = update_biases(data, out.codes, model.W1, model.W2);
    try {
      model.validate();
    } catch (const NumericalError& e) {
      throw NumericalError("RBA iteration " + std::to_string(t) + ": " + e.what());
    }
    out.codes = b_step(data, model, out.codes, hp.lambda, hp.b_sweeps);
    const double obj = rba_objective(data, model, out.codes, hp.lambda, hp.beta);
    if (!std::isfinite(obj))
      throw NumericalError("RBA iteration " + std::to_string(t) +
                           ": objective is not finite");
    out.trace.push_back(obj);
  }
  return out;
}

BinaryCodeMatrix rba_encode(const DataMatrix& data, const HashModel& model) {
  if (data.rows() != model.dim())
    throw std::invalid_argument("encode: data dimension " +
                                std::to_string(data.rows()) +
                                " does not match model dimension " +
                                std::to_string(model.dim()));
  return sign_matrix((model.W1 * data).colwise() + model.c1);
}

DataMatrix reconstruct(const BinaryCodeMatrix& codes, const HashModel& model) {
  if (codes.rows() != model.code_length())
    throw std::invalid_argument("reconstruct: code length " +
                                std::to_string(codes.rows()) +
                                " does not match model code length " +
                                std::to_string(model.code_length()));
  check_codes(codes, "codes");
  return (model.W2 * codes).colwise() + model.c2;
}

double mean_squared_error(const DataMatrix& x, const DataMatrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::invalid_argument("reconstruction error: shape mismatch");
  if (x.cols() == 0) throw std::invalid_argument("reconstruction error: no samples");
  return (x - y).squaredNorm() / static_cast<double>(x.cols());
}

HashModel hash_model_from_itq(const ItqModel& itq) {
  HashModel model;
  model.W1 = itq.rotation * itq.projection;
  model.c1 = -(model.W1 * itq.mean);
  model.W2 = model.W1.transpose();
  model.c2 = itq.mean;
  return model;
}

void save_model(const HashModel& model, const std::filesystem::path& path) {
  model.validate();
  std::vector<std::uint8_t> bytes(kModelMagic, kModelMagic + 4);
  auto put_u32 = [&](std::uint32_t v) {
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  };
  auto put_f64 = [&](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  };
  put_u32(static_cast<std::uint32_t>(model.code_length()));
  put_u32(static_cast<std::uint32_t>(model.dim()));
  for (Eigen::Index i = 0; i < model.W1.rows(); ++i)
    for (Eigen::Index j = 0; j < model.W1.cols(); ++j) put_f64(model.W1(i, j));
  for (Eigen::Index i = 0; i < model.c1.size(); ++i) put_f64(model.c1(i));
  for (Eigen::Index i = 0; i < model.W2.rows(); ++i)
    for (Eigen::Index j = 0; j < model.W2.cols(); ++j) put_f64(model.W2(i, j));
  for (Eigen::Index i = 0; i < model.c2.size(); ++i) put_f64(model.c2(i));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

HashModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kModelMagic, 4) != 0)
    throw std::runtime_error(path.string() + ": not a model file (bad magic)");
  std::size_t pos = 4;
  auto get_u32 = [&] {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * b);
    return v;
  };
  const auto L = static_cast<Eigen::Index>(get_u32());
  const auto D = static_cast<Eigen::Index>(get_u32());
  const std::size_t values = static_cast<std::size_t>(2 * L * D + L + D);
  if (L < 1 || D < 1 || bytes.size() != 12 + 8 * values)
    throw std::runtime_error(path.string() + ": model file size mismatch");
  auto get_f64 = [&] {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * b);
    return std::bit_cast<double>(v);
  };
  HashModel model = HashModel::zeros(static_cast<int>(L), static_cast<int>(D));
  for (Eigen::Index i = 0; i < L; ++i)
    for (Eigen::Index j = 0; j < D; ++j) model.W1(i, j) = get_f64();
  for (Eigen::Index i = 0; i < L; ++i) model.c1(i) = get_f64();
  for (Eigen::Index i = 0; i < D; ++i)
    for (Eigen::Index j = 0; j < L; ++j) model.W2(i, j) = get_f64();
  for (Eigen::Index i = 0; i < D; ++i) model.c2(i) = get_f64();
  model.validate();
  return model;
}

}  // namespace agh
