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

#include "agh/aggregation.hpp"

#include <cmath>
#include <string>

namespace agh {

Vector gmp_aggregate(const LocalFeatureSet& local, const GmpParams& params) {
  if (!(params.mu > 0.0) || !std::isfinite(params.mu))
    throw std::invalid_argument("GMP regularizer mu must be positive");
  if (local.cols() < 1 || local.rows() < 1)
    throw std::invalid_argument("GMP needs at least one local feature");
  if (!local.allFinite())
    throw NumericalError("GMP input contains non-finite values");

  const Eigen::Index D = local.rows();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(D, D) * params.mu;
  gram.selfadjointView<Eigen::Lower>().rankUpdate(local);
  const Vector rhs = local.rowwise().sum();

  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(gram);
  if (llt.info() != Eigen::Success)
    throw NumericalError("GMP system is not positive definite");
  Vector phi = llt.solve(rhs);
  if (!phi.allFinite()) throw NumericalError("GMP solve produced non-finite values");
  return phi;
}

DataMatrix gmp_aggregate_all(const std::vector<LocalFeatureSet>& dataset,
                             const GmpParams& params, int threads) {
  if (dataset.empty()) return DataMatrix(0, 0);
  const Eigen::Index D = dataset.front().rows();
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (dataset[i].rows() != D)
      throw std::invalid_argument("image " + std::to_string(i) +
                                  " has dimension " +
                                  std::to_string(dataset[i].rows()) +
                                  ", expected " + std::to_string(D));

  DataMatrix phi(D, static_cast<Eigen::Index>(dataset.size()));
  parallel_for(dataset.size(), threads, [&](std::size_t i) {
    try {
      phi.col(static_cast<Eigen::Index>(i)) = gmp_aggregate(dataset[i], params);
    } catch (const NumericalError& e) {
      throw NumericalError("image " + std::to_string(i) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("image " + std::to_string(i) + ": " + e.what());
    }
  });
  return phi;
}

void normalize_columns(DataMatrix& matrix) {
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    const double n = matrix.col(j).norm();
    if (n > 0.0) matrix.col(j) /= n;
  }
}

}  // namespace agh
