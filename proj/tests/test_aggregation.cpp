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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "agh/aggregation.hpp"
#include "agh/synth.hpp"
#include "test_util.hpp"

using namespace agh;

namespace {

// Ridge regression written as the stacked least-squares problem
// [V^T; sqrt(mu) I] phi ~ [1; 0], solved by column-pivoted QR.
Vector ridge_oracle(const LocalFeatureSet& v, double mu) {
  const Eigen::Index d = v.rows(), n = v.cols();
  Eigen::MatrixXd a(n + d, d);
  a << v.transpose(), std::sqrt(mu) * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + d);
  b.head(n).setOnes();
  return a.colPivHouseholderQr().solve(b);
}

}  // namespace

TEST_CASE("gmp_aggregate analytic cases") {
  LocalFeatureSet v(2, 1);
  v << 1, 0;
  const Vector phi = gmp_aggregate(v, {1.0});
  CHECK(std::abs(phi(0) - 0.5) < 1e-12);
  CHECK(phi(1) == 0.0);

  LocalFeatureSet three(2, 3);
  three << 1, 1, 1, 0, 0, 0;
  const Vector phi3 = gmp_aggregate(three, {1.0});
  CHECK(std::abs(phi3(0) - 0.75) < 1e-12);
  CHECK(std::abs(phi3(1)) < 1e-15);
}

TEST_CASE("gmp_aggregate matches an independent ridge solve") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const LocalFeatureSet v = agh::testing::gaussian(4, 6, rng);
    const Vector phi = gmp_aggregate(v, {100.0});
    CHECK(agh::testing::rel_diff(phi, ridge_oracle(v, 100.0)) < 1e-10);

    const Eigen::MatrixXd a =
        v * v.transpose() + 100.0 * Eigen::MatrixXd::Identity(4, 4);
    const Vector rhs = v.rowwise().sum();
    CHECK((a * phi - rhs).norm() <= 1e-8 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("equalization as mu goes to zero") {
  // V^T phi can only reach 1 exactly when V^T has full row rank (n <= D).
  std::mt19937_64 rng(7);
  const Eigen::Index d = 8, n = 5;
  Eigen::MatrixXd q = agh::testing::gaussian(d, d, rng).householderQr().householderQ();
  LocalFeatureSet v = q.leftCols(n) * Eigen::Vector<double, 5>(1.0, 1.5, 2.0, 2.5, 3.0).asDiagonal();
  const Vector phi = gmp_aggregate(v, {1e-8});
  const double dev = ((v.transpose() * phi).array() - 1.0).abs().maxCoeff();
  CHECK(dev < 1e-4);
}

TEST_CASE("any positive mu and data scale is solvable") {
  std::mt19937_64 rng(9);
  const LocalFeatureSet v = agh::testing::gaussian(6, 10, rng);
  for (double mu : {1e-12, 1e-6, 1.0, 1e6, 1e12})
    for (double scale : {1e-6, 1.0, 1e6})
      CHECK_NOTHROW(gmp_aggregate(scale * v, {mu}));
}

TEST_CASE("gmp_aggregate input validation") {
  LocalFeatureSet v(2, 1);
  v << 1, 0;
  CHECK_THROWS_AS(gmp_aggregate(v, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(gmp_aggregate(v, {-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(gmp_aggregate(LocalFeatureSet(2, 0), {1.0}), std::invalid_argument);
  v(1, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(gmp_aggregate(v, {1.0}), NumericalError);
}

TEST_CASE("gmp_aggregate_all is a per-image loop, order-equivariant and thread-independent") {
  SyntheticSpec spec;
  spec.image_count = 100;
  spec.feature_dim = 12;
  spec.min_locals = 3;
  spec.max_locals = 15;
  spec.query_count = 1;
  const auto data = generate_synthetic(spec);
  const GmpParams params{100.0};

  const DataMatrix phi = gmp_aggregate_all(data.database, params);
  REQUIRE(phi.cols() == 100);
  for (std::size_t i = 0; i < data.database.size(); ++i)
    CHECK(phi.col(static_cast<Eigen::Index>(i)) == gmp_aggregate(data.database[i], params));

  CHECK(gmp_aggregate_all(data.database, params, 4) == phi);

  std::vector<std::size_t> perm(data.database.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(5);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<LocalFeatureSet> shuffled;
  for (auto p : perm) shuffled.push_back(data.database[p]);
  const DataMatrix phi_perm = gmp_aggregate_all(shuffled, params);
  for (std::size_t i = 0; i < perm.size(); ++i)
    CHECK(phi_perm.col(static_cast<Eigen::Index>(i)) ==
          phi.col(static_cast<Eigen::Index>(perm[i])));

  const DataMatrix one = gmp_aggregate_all({data.database[0]}, params);
  CHECK(one.col(0) == gmp_aggregate(data.database[0], params));
}

TEST_CASE("gmp_aggregate_all reports the failing image") {
  std::vector<LocalFeatureSet> sets(3, LocalFeatureSet::Ones(2, 2));
  sets[2](0, 0) = std::nan("");
  CHECK_THROWS_WITH_AS(gmp_aggregate_all(sets, {1.0}), doctest::Contains("image 2"),
                       NumericalError);
  sets[2] = LocalFeatureSet::Ones(3, 2);
  CHECK_THROWS_AS(gmp_aggregate_all(sets, {1.0}), std::invalid_argument);
}

TEST_CASE("normalize_columns") {
  DataMatrix m(2, 3);
  m << 3, 0, 1, 4, 0, 0;
  normalize_columns(m);
  CHECK(m.col(0).norm() == doctest::Approx(1.0));
  CHECK(m.col(1).norm() == 0.0);
  CHECK(m(0, 2) == 1.0);
}
