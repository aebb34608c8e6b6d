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

#include <functional>

#include "agh/itq.hpp"
#include "agh/rba.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace agh;
using agh::testing::gaussian;
using agh::testing::random_codes;
using agh::testing::rel_diff;

using agh::oracle::numeric_gradient;
using agh::oracle::ridge_rows;

namespace {

HashModel random_model(int L, int D, std::mt19937_64& rng) {
  return {gaussian(L, D, rng, 0.5), gaussian(L, 1, rng, 0.5), gaussian(D, L, rng, 0.5),
          gaussian(D, 1, rng, 0.5)};
}

}  // namespace

TEST_CASE("encoder weight update") {
  std::mt19937_64 rng(1);
  SUBCASE("huge beta drives W1 to zero") {
    const DataMatrix x = gaussian(8, 50, rng);
    const auto w1 = update_encoder_weights(x, random_codes(4, 50, rng), Vector::Zero(4), 1e-2,
                                           1e12);
    CHECK(w1.norm() < 1e-6);
  }
  SUBCASE("identity data recovers B") {
    const auto b = random_codes(3, 6, rng);
    const auto w1 = update_encoder_weights(DataMatrix::Identity(6, 6), b, Vector::Zero(3), 1.0,
                                           1e-12);
    CHECK((w1 - b).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("matches a generic ridge solve and its normal equations") {
    for (int trial = 0; trial < 10; ++trial) {
      const DataMatrix x = gaussian(8, 50, rng);
      const auto b = random_codes(4, 50, rng);
      const Vector c1 = gaussian(4, 1, rng);
      const double lambda = 1e-2, beta = 1.0;
      const auto w1 = update_encoder_weights(x, b, c1, lambda, beta);
      const Eigen::MatrixXd target = b.colwise() - c1;
      CHECK(rel_diff(w1, ridge_rows(target, x, beta / lambda)) < 1e-6);
      const Eigen::MatrixXd normal =
          w1 * (lambda * x * x.transpose() + beta * Eigen::MatrixXd::Identity(8, 8)) -
          lambda * target * x.transpose();
      CHECK(normal.norm() <= 1e-8 * (lambda * target * x.transpose()).norm());
    }
  }
  SUBCASE("errors") {
    const DataMatrix x = gaussian(4, 5, rng);
    CHECK_THROWS_AS(update_encoder_weights(x, random_codes(2, 4, rng), Vector::Zero(2), 1, 1),
                    std::invalid_argument);
    DataMatrix bad = x;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(update_encoder_weights(bad, random_codes(2, 5, rng), Vector::Zero(2), 1, 1),
                    NumericalError);
  }
}

TEST_CASE("decoder weight update") {
  std::mt19937_64 rng(2);
  SUBCASE("orthogonal code rows") {
    // Rows of a 4x8 Hadamard-type matrix: orthogonal with norm sqrt(8).
    BinaryCodeMatrix b(4, 8);
    b << 1, 1, 1, 1, 1, 1, 1, 1,
         1, -1, 1, -1, 1, -1, 1, -1,
         1, 1, -1, -1, 1, 1, -1, -1,
         1, -1, -1, 1, 1, -1, -1, 1;
    const DataMatrix x = gaussian(5, 8, rng);
    const auto w2 = update_decoder_weights(x, b, Vector::Zero(5), 1e-12);
    CHECK((w2 - x * b.transpose() / 8.0).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("huge beta") {
    const auto w2 = update_decoder_weights(gaussian(8, 50, rng), random_codes(4, 50, rng),
                                           Vector::Zero(8), 1e12);
    CHECK(w2.norm() < 1e-6);
  }
  SUBCASE("matches a generic ridge solve") {
    for (int trial = 0; trial < 10; ++trial) {
      const DataMatrix x = gaussian(8, 50, rng);
      const auto b = random_codes(4, 50, rng);
      const Vector c2 = gaussian(8, 1, rng);
      const auto w2 = update_decoder_weights(x, b, c2, 1.0);
      const Eigen::MatrixXd target = x.colwise() - c2;
      CHECK(rel_diff(w2, ridge_rows(target, b, 1.0)) < 1e-6);
      const Eigen::MatrixXd normal =
          w2 * (b * b.transpose() + Eigen::MatrixXd::Identity(4, 4)) - target * b.transpose();
      CHECK(normal.norm() <= 1e-8 * (target * b.transpose()).norm());
    }
  }
}

TEST_CASE("bias update") {
  SUBCASE("zero encoder gives code row means") {
    BinaryCodeMatrix b(2, 2);
    b << 1, -1, 1, 1;
    const DataMatrix x = DataMatrix::Ones(3, 2);
    const auto [c1, c2] = update_biases(x, b, Eigen::MatrixXd::Zero(2, 3),
                                        Eigen::MatrixXd::Zero(3, 2));
    CHECK(c1(0) == 0.0);
    CHECK(c1(1) == 1.0);
    CHECK(c2 == Vector::Ones(3));
  }
  SUBCASE("gradient vanishes at the returned biases") {
    std::mt19937_64 rng(3);
    const DataMatrix x = gaussian(8, 50, rng);
    const auto b = random_codes(4, 50, rng);
    HashModel mdl = random_model(4, 8, rng);
    std::tie(mdl.c1, mdl.c2) = update_biases(x, b, mdl.W1, mdl.W2);
    auto f = [&] { return rba_objective(x, mdl, b, 1e-2, 1.0); };
    const double obj = f();
    Eigen::MatrixXd c1 = mdl.c1, c2 = mdl.c2;
    auto f1 = [&] { mdl.c1 = c1; return f(); };
    const double g1 = numeric_gradient(c1, f1).norm();
    mdl.c1 = c1;
    auto f2 = [&] { mdl.c2 = c2; return f(); };
    const double g2 = numeric_gradient(c2, f2).norm();
    CHECK(g1 < 1e-8 * (1 + obj));
    CHECK(g2 < 1e-8 * (1 + obj));
  }
  SUBCASE("no samples") {
    CHECK_THROWS_AS(update_biases(DataMatrix(3, 0), BinaryCodeMatrix(2, 0),
                                  Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(3, 2)),
                    std::invalid_argument);
  }
}

TEST_CASE("rba_objective") {
  std::mt19937_64 rng(4);
  SUBCASE("zero model and data") {
    const auto b = random_codes(3, 7, rng);
    const auto mdl = HashModel::zeros(3, 5);
    CHECK(rba_objective(DataMatrix::Zero(5, 7), mdl, b, 0.3, 1.0) ==
          doctest::Approx(0.3 * 3 * 7 / 2.0));
  }
  SUBCASE("weight-decay term scales with beta") {
    const DataMatrix x = gaussian(5, 9, rng);
    const auto b = random_codes(3, 9, rng);
    HashModel mdl = random_model(3, 5, rng);
    // Compare two models that differ only in W1 on zero data so the other
    // terms involving W1 vanish.
    const DataMatrix zero = DataMatrix::Zero(5, 9);
    HashModel scaled = mdl;
    scaled.W1 *= std::sqrt(2.0);
    const double diff = rba_objective(zero, scaled, b, 0.1, 0.7) -
                        rba_objective(zero, mdl, b, 0.1, 0.7);
    CHECK(diff == doctest::Approx(0.5 * 0.7 * mdl.W1.squaredNorm()).epsilon(1e-12));
  }
  SUBCASE("matches an explicit-loop evaluation") {
    for (int trial = 0; trial < 10; ++trial) {
      const DataMatrix x = gaussian(7, 20, rng);
      const auto b = random_codes(4, 20, rng);
      const auto mdl = random_model(4, 7, rng);
      const double a = rba_objective(x, mdl, b, 0.01, 1.0);
      CHECK(std::abs(a - agh::oracle::rba_objective(x, mdl, b, 0.01, 1.0)) <= 1e-12 * std::abs(a));
    }
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(rba_objective(gaussian(5, 3, rng), HashModel::zeros(2, 4),
                                  random_codes(2, 3, rng), 1, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("B-step") {
  std::mt19937_64 rng(5);
  SUBCASE("single row is the sign of q") {
    const DataMatrix x = gaussian(6, 30, rng);
    const auto mdl = random_model(1, 6, rng);
    const double lambda = 0.2;
    const auto b = b_step(x, mdl, random_codes(1, 30, rng), lambda, 1);
    const Eigen::MatrixXd q = mdl.W2.transpose() * (x.colwise() - mdl.c2) +
                              lambda * ((mdl.W1 * x).colwise() + mdl.c1);
    CHECK(b == sign_matrix(q));
  }
  SUBCASE("ties resolve to +1") {
    const auto b = b_step(gaussian(4, 6, rng), HashModel::zeros(3, 4), random_codes(3, 6, rng),
                          0.5, 1);
    CHECK(b == BinaryCodeMatrix::Ones(3, 6));
  }
  SUBCASE("every row update is an exact minimizer and never increases the objective") {
    for (int trial = 0; trial < 20; ++trial) {
      const DataMatrix x = gaussian(6, 5, rng);
      const auto mdl = random_model(4, 6, rng);
      const BStepWorkspace ws(x, mdl, 0.3);
      BinaryCodeMatrix b = random_codes(4, 5, rng);
      for (Eigen::Index k = 0; k < 4; ++k) {
        const double before = ws.objective(b);
        ws.update_row(b, k);
        const double after = ws.objective(b);
        CHECK(after <= before + 1e-12 * std::abs(before));
        // Exhaustive over all 2^5 alternatives for this row.
        for (int mask = 0; mask < 32; ++mask) {
          BinaryCodeMatrix alt = b;
          for (int i = 0; i < 5; ++i) alt(k, i) = (mask >> i) & 1 ? 1.0 : -1.0;
          CHECK(ws.objective(alt) >= after - 1e-12 * std::abs(after));
        }
      }
    }
  }
  SUBCASE("fixed point against the exhaustive per-column optimum") {
    for (int trial = 0; trial < 20; ++trial) {
      const DataMatrix x = gaussian(6, 5, rng);
      const auto mdl = random_model(4, 6, rng);
      const double lambda = 0.3;
      const auto init = random_codes(4, 5, rng);
      int sweeps = 0;
      const auto b = b_step(x, mdl, init, lambda, 100, &sweeps);
      CHECK(sweeps < 100);
      const BStepWorkspace ws(x, mdl, lambda);
      const double obj = ws.objective(b);
      CHECK(obj <= ws.objective(init) + 1e-12);
      // The B-step objective separates over columns.
      auto column_obj = [&](const Eigen::VectorXd& code, Eigen::Index i) {
        const Eigen::VectorXd xt = x.col(i) - mdl.c2;
        const Eigen::VectorXd h = mdl.W1 * x.col(i) + mdl.c1;
        return (xt - mdl.W2 * code).squaredNorm() + lambda * (h - code).squaredNorm();
      };
      double best_total = 0.0;
      for (Eigen::Index i = 0; i < 5; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int mask = 0; mask < 16; ++mask) {
          Eigen::VectorXd code(4);
          for (int k = 0; k < 4; ++k) code(k) = (mask >> k) & 1 ? 1.0 : -1.0;
          best = std::min(best, column_obj(code, i));
        }
        best_total += best;
        const Eigen::VectorXd here = b.col(i);
        for (int k = 0; k < 4; ++k) {
          Eigen::VectorXd flipped = here;
          flipped(k) = -flipped(k);
          CHECK(column_obj(flipped, i) >= column_obj(here, i) - 1e-12);
        }
      }
      CHECK(obj >= best_total - 1e-12);
    }
  }
  SUBCASE("one sweep stops; no-change sweep exits early") {
    const DataMatrix x = gaussian(6, 20, rng);
    const auto mdl = random_model(4, 6, rng);
    int sweeps = 0;
    const auto b = b_step(x, mdl, random_codes(4, 20, rng), 0.1, 1, &sweeps);
    CHECK(sweeps == 1);
    const auto fixed = b_step(x, mdl, b, 0.1, 50);
    b_step(x, mdl, fixed, 0.1, 50, &sweeps);
    CHECK(sweeps == 1);
  }
  SUBCASE("invalid initial codes") {
    BinaryCodeMatrix bad = random_codes(2, 3, rng);
    bad(1, 1) = 0.5;
    CHECK_THROWS_AS(b_step(gaussian(4, 3, rng), HashModel::zeros(2, 4), bad, 0.1, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("each alternating sub-step does not increase the objective") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const DataMatrix x = gaussian(8, 40, rng);
    const double lambda = 1e-2, beta = 1.0;
    HashModel mdl = random_model(4, 8, rng);
    BinaryCodeMatrix b = random_codes(4, 40, rng);
    auto obj = [&] { return rba_objective(x, mdl, b, lambda, beta); };
    double prev = obj();
    auto step_ok = [&] {
      const double now = obj();
      CHECK(now <= prev * (1 + 1e-12));
      prev = now;
    };
    mdl.W1 = update_encoder_weights(x, b, mdl.c1, lambda, beta);
    step_ok();
    mdl.W2 = update_decoder_weights(x, b, mdl.c2, beta);
    step_ok();
    std::tie(mdl.c1, mdl.c2) = update_biases(x, b, mdl.W1, mdl.W2);
    step_ok();
    b = b_step(x, mdl, b, lambda, 1);
    step_ok();
  }
}

TEST_CASE("closed-form blocks are stationary points") {
  std::mt19937_64 rng(7);
  const DataMatrix x = gaussian(8, 50, rng);
  const auto b = random_codes(4, 50, rng);
  const double lambda = 1e-2, beta = 1.0;
  HashModel mdl = random_model(4, 8, rng);
  auto f = [&] { return rba_objective(x, mdl, b, lambda, beta); };

  mdl.W1 = update_encoder_weights(x, b, mdl.c1, lambda, beta);
  mdl.W2 = update_decoder_weights(x, b, mdl.c2, beta);
  const double obj = f();
  Eigen::MatrixXd w1 = mdl.W1;
  auto f1 = [&] { mdl.W1 = w1; return f(); };
  CHECK(numeric_gradient(w1, f1).norm() < 1e-6 * (1 + obj));
  mdl.W1 = w1;
  Eigen::MatrixXd w2 = mdl.W2;
  auto f2 = [&] { mdl.W2 = w2; return f(); };
  CHECK(numeric_gradient(w2, f2).norm() < 1e-6 * (1 + obj));
}

TEST_CASE("rba_train") {
  std::mt19937_64 rng(8);
  const DataMatrix x = gaussian(12, 150, rng);
  RbaHyperparams hp;
  hp.code_length = 6;

  SUBCASE("defaults") {
    RbaHyperparams d;
    CHECK(d.lambda == 1e-2);
    CHECK(d.beta == 1.0);
    CHECK(d.iterations == 10);
  }
  SUBCASE("trace is non-increasing and codes are binary") {
    const auto fit = rba_train(x, hp, 3);
    REQUIRE(fit.trace.size() == 10);
    for (std::size_t t = 1; t < fit.trace.size(); ++t)
      CHECK(fit.trace[t] <= fit.trace[t - 1] * (1 + 1e-9));
    CHECK(is_binary(fit.codes));
    CHECK(fit.trace.back() ==
          doctest::Approx(rba_objective(x, fit.model, fit.codes, hp.lambda, hp.beta))
              .epsilon(1e-12));
  }
  SUBCASE("single iteration") {
    hp.iterations = 1;
    CHECK(rba_train(x, hp, 3).trace.size() == 1);
  }
  SUBCASE("encoder system is factored once per run") {
    const auto before = EncoderSolver::instances_built();
    rba_train(x, hp, 3);
    CHECK(EncoderSolver::instances_built() - before == 1);
  }
  SUBCASE("deterministic for a fixed seed") {
    const auto a = rba_train(x, hp, 11);
    const auto b = rba_train(x, hp, 11);
    CHECK(a.model.W1 == b.model.W1);
    CHECK(a.model.W2 == b.model.W2);
    CHECK(a.codes == b.codes);
    CHECK(a.trace == b.trace);
  }
  SUBCASE("warm start uses the given codes") {
    hp.iterations = 1;
    const auto init = random_codes(6, 150, rng);
    const auto fit = rba_train(x, hp, 1, &init);
    HashModel expect = HashModel::zeros(6, 12);
    expect.W1 = update_encoder_weights(x, init, expect.c1, hp.lambda, hp.beta);
    expect.W2 = update_decoder_weights(x, init, expect.c2, hp.beta);
    std::tie(expect.c1, expect.c2) = update_biases(x, init, expect.W1, expect.W2);
    CHECK(rel_diff(fit.model.W1, expect.W1) < 1e-12);
    CHECK(fit.codes == b_step(x, expect, init, hp.lambda, 1));
  }
  SUBCASE("errors") {
    RbaHyperparams big = hp;
    big.code_length = 13;
    CHECK_THROWS_AS(rba_train(x, big, 1), std::invalid_argument);
    CHECK_THROWS_WITH_AS(rba_train(x.leftCols(4), hp, 1), doctest::Contains("reduce"),
                         std::invalid_argument);
    RbaHyperparams bad = hp;
    bad.beta = 0.0;
    CHECK_THROWS_AS(rba_train(x, bad, 1), std::invalid_argument);
    DataMatrix nan = x;
    nan(3, 3) = std::nan("");
    CHECK_THROWS_AS(rba_train(nan, hp, 1), NumericalError);
  }
}

TEST_CASE("rba_train improves on the ITQ initialization (Gaussian mixture)") {
  std::mt19937_64 rng(9);
  const int D = 64, m = 2000, L = 16;
  const Eigen::MatrixXd centers = gaussian(D, 8, rng, 3.0);
  std::uniform_int_distribution<int> pick(0, 7);
  DataMatrix x = gaussian(D, m, rng);
  for (int i = 0; i < m; ++i) x.col(i) += centers.col(pick(rng));

  RbaHyperparams hp;
  hp.code_length = L;
  const auto fit = rba_train(x, hp, 5);

  const auto b0 = itq_encode(x, itq_train(x, L, hp.itq_iterations, 5).model);
  HashModel first = HashModel::zeros(L, D);
  first.W1 = update_encoder_weights(x, b0, first.c1, hp.lambda, hp.beta);
  first.W2 = update_decoder_weights(x, b0, first.c2, hp.beta);
  std::tie(first.c1, first.c2) = update_biases(x, b0, first.W1, first.W2);
  CHECK(fit.trace.back() <= rba_objective(x, first, b0, hp.lambda, hp.beta));
}

TEST_CASE("rba_encode") {
  HashModel mdl = HashModel::zeros(2, 2);
  mdl.W1.setIdentity();
  DataMatrix x(2, 1);
  x << 0.3, -0.2;
  BinaryCodeMatrix expect(2, 1);
  expect << 1, -1;
  CHECK(rba_encode(x, mdl) == expect);
  CHECK(rba_encode(DataMatrix::Zero(2, 3), mdl) == BinaryCodeMatrix::Ones(2, 3));
  CHECK_THROWS_AS(rba_encode(DataMatrix::Zero(3, 1), mdl), std::invalid_argument);

  std::mt19937_64 rng(10);
  const auto rnd = random_model(5, 9, rng);
  const DataMatrix data = gaussian(9, 40, rng);
  const auto codes = rba_encode(data, rnd);
  for (Eigen::Index i = 0; i < 40; ++i)
    for (Eigen::Index k = 0; k < 5; ++k) {
      double h = rnd.c1(k);
      for (Eigen::Index d = 0; d < 9; ++d) h += rnd.W1(k, d) * data(d, i);
      if (std::abs(h) > 1e-12) CHECK(codes(k, i) == (h > 0 ? 1.0 : -1.0));
    }
}

TEST_CASE("reconstruct and reconstruction error") {
  std::mt19937_64 rng(11);
  HashModel mdl = random_model(4, 6, rng);
  const auto z = random_codes(4, 10, rng);

  HashModel no_decoder = mdl;
  no_decoder.W2.setZero();
  const auto r0 = reconstruct(z, no_decoder);
  for (Eigen::Index i = 0; i < 10; ++i) CHECK(r0.col(i) == mdl.c2);

  HashModel negated = mdl;
  negated.W2 = -mdl.W2;
  CHECK(reconstruct(z, mdl) == reconstruct(-z, negated));

  const DataMatrix x = gaussian(6, 10, rng);
  const DataMatrix rec = reconstruct(z, mdl);
  double naive = 0.0;
  for (Eigen::Index i = 0; i < 10; ++i)
    for (Eigen::Index d = 0; d < 6; ++d) naive += (x(d, i) - rec(d, i)) * (x(d, i) - rec(d, i));
  naive /= 10;
  CHECK(std::abs(mean_squared_error(x, rec) - naive) <= 1e-12 * naive);

  CHECK_THROWS_AS(reconstruct(random_codes(3, 2, rng), mdl), std::invalid_argument);
}

TEST_CASE("ITQ as an affine hash model") {
  std::mt19937_64 rng(12);
  const DataMatrix x = gaussian(10, 80, rng);
  const auto itq = itq_train(x, 5, 20, 1).model;
  const auto mdl = hash_model_from_itq(itq);
  mdl.validate();
  const Eigen::MatrixXd proj = itq.rotation * (itq.projection * (x.colwise() - itq.mean));
  const auto a = rba_encode(x, mdl);
  const auto b = itq_encode(x, itq);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (std::abs(proj.data()[i]) > 1e-9) CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("model file layout and round trip") {
  const auto dir = agh::testing::temp_dir("model");
  std::mt19937_64 rng(13);
  const auto mdl = random_model(3, 5, rng);
  save_model(mdl, dir / "m.aghm");
  const auto bytes = agh::testing::file_bytes(dir / "m.aghm");
  REQUIRE(bytes.size() == 12 + 8 * (2 * 3 * 5 + 3 + 5));
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "AGHM");
  CHECK(bytes[4] == 3);
  CHECK(bytes[8] == 5);
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 12, 8);
  CHECK(first == mdl.W1(0, 0));
  std::memcpy(&first, bytes.data() + 12 + 8, 8);
  CHECK(first == mdl.W1(0, 1));  // row-major

  const auto back = load_model(dir / "m.aghm");
  CHECK(back.W1 == mdl.W1);
  CHECK(back.c1 == mdl.c1);
  CHECK(back.W2 == mdl.W2);
  CHECK(back.c2 == mdl.c2);

  agh::testing::write_bytes(dir / "bad.aghm", {'N', 'O', 'P', 'E', 0, 0, 0, 0, 0, 0, 0, 0});
  CHECK_THROWS(load_model(dir / "bad.aghm"));
}
