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

#include "agh/itq.hpp"

#include <random>
#include <string>

namespace agh {
namespace {

Eigen::MatrixXd random_orthogonal(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

ItqTraining itq_train(const DataMatrix& data, int code_length, int iterations,
                      std::uint64_t seed) {
  const Eigen::Index D = data.rows();
  const Eigen::Index m = data.cols();
  const int L = code_length;
  if (L < 1) throw std::invalid_argument("code length must be at least 1");
  if (L > D)
    throw std::invalid_argument("code length " + std::to_string(L) +
                                " exceeds feature dimension " + std::to_string(D));
  if (m < L)
    throw std::invalid_argument("ITQ needs at least L=" + std::to_string(L) +
                                " training vectors, got " + std::to_string(m) +
                                "; reduce the code length");
  if (iterations < 1) throw std::invalid_argument("ITQ iterations must be >= 1");
  if (!data.allFinite()) throw NumericalError("ITQ input contains non-finite values");

  ItqTraining out;
  ItqModel& model = out.model;
  model.mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - model.mean;
  const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(m);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw NumericalError("covariance eigendecomposition failed");
  const Vector& values = eig.eigenvalues();  // ascending
  const double tol = 1e-10 * std::max(values(D - 1), 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < D; ++i)
    if (values(i) > tol && values(i) > 0.0) ++rank;
  if (rank < L)
    throw std::invalid_argument("degenerate covariance: rank " +
                                std::to_string(rank) + " < code length " +
                                std::to_string(L));

  model.projection = eig.eigenvectors().rightCols(L).rowwise().reverse().transpose();
  const Eigen::MatrixXd projected = model.projection * centered;  // L x m

  model.rotation = random_orthogonal(L, seed);
  out.loss_trace.reserve(static_cast<std::size_t>(iterations));
  for (int it = 0; it < iterations; ++it) {
    out.codes = sign_matrix(model.rotation * projected);
    // max tr(R V B^T): with V B^T = U S W^T the optimum is R = W U^T.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(projected * out.codes.transpose(),
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    model.rotation = svd.matrixV() * svd.matrixU().transpose();
    out.loss_trace.push_back(
        (out.codes - model.rotation * projected).squaredNorm());
  }
  return out;
}

BinaryCodeMatrix itq_encode(const DataMatrix& data, const ItqModel& model) {
  if (data.rows() != model.dim())
    throw std::invalid_argument("ITQ encode: data dimension " +
                                std::to_string(data.rows()) +
                                " does not match model dimension " +
                                std::to_string(model.dim()));
  return sign_matrix(model.rotation *
                     (model.projection * (data.colwise() - model.mean)));
}

double itq_quantization_loss(const DataMatrix& data, const ItqModel& model) {
  const Eigen::MatrixXd v =
      model.rotation * (model.projection * (data.colwise() - model.mean));
  return (sign_matrix(v) - v).squaredNorm();
}

}  // namespace agh
