// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fastfm/diagnostics.hpp"
#include "fastfm/error.hpp"
#include "fastfm/sgd.hpp"
#include "fastfm/special.hpp"
#include "support/synthetic.hpp"

namespace fastfm {
namespace {

using testing::random_params;
using testing::random_sparse;

LabeledData column_data(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::size_t> rows, cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < x.size(); ++i) {
    rows.push_back(i);
    cols.push_back(0);
    vals.push_back(x[i]);
  }
  return {SparseRowMatrix::from_triplets(x.size(), 1, rows, cols, vals), y};
}

SolverConfig linear_config(double step) {
  SolverConfig config;
  config.rank = 0;
  config.fit_bias = false;
  config.step_size = step;
  return config;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

TEST(SgdFit, OlsToyConverges) {
  const auto data = column_data({1.0, 2.0}, {2.0, 4.0});
  auto config = linear_config(0.1);  // 0.1 * (1 + 4) < 2
  config.n_iter = 200;
  const auto fit = sgd_fit(data, config);
  EXPECT_NEAR(fit.params.w[0], 2.0, 1e-3);
  EXPECT_EQ(fit.report.n_iter_done, 200u);
  EXPECT_LT(fit.report.objective_per_iter.back(), 1e-6);
}

TEST(SgdFit, FullBatchStationaryAtOptimum) {
  const auto data = column_data({1.0, 2.0}, {2.0, 4.0});
  auto config = linear_config(0.05);
  config.n_iter = 50;
  FMParams warm(1, 0);
  warm.w[0] = 2.0;
  const auto fit = sgd_fit(data, config, warm, SgdHooks{true});
  EXPECT_NEAR(fit.params.w[0], 2.0, 1e-12);
  EXPECT_EQ(fit.params.w0, 0.0);
}

TEST(SgdFit, FullBatchMatchesGradientStep) {
  Rng rng(1);
  LabeledData data{random_sparse(rng, 20, 5, 0.4), {}};
  for (std::size_t i = 0; i < 20; ++i) data.y.push_back(rng.normal());
  SolverConfig config;
  config.rank = 2;
  config.n_iter = 1;
  config.step_size = 0.01;
  config.set_l2_reg(0.3);
  config.l2_reg_w0 = 0.1;
  const auto warm = random_params(rng, 5, 2);
  const auto fit = sgd_fit(data, config, warm, SgdHooks{true});
  const auto grad = loss_gradient(warm, data, config);
  auto flat = flatten(warm);
  for (std::size_t j = 0; j < flat.size(); ++j) flat[j] -= 0.01 * grad[j];
  EXPECT_EQ(flatten(fit.params), flat);
}

TEST(SgdFit, SigmoidLossFallsOnSeparableData) {
  const auto data = column_data({-2.0, -1.0, -0.5, 0.5, 1.5, 3.0}, {-1, -1, -1, 1, 1, 1});
  SolverConfig config;
  config.rank = 0;
  config.task = Task::classification;
  config.step_size = 0.1;
  config.n_iter = 20;
  const auto fit = sgd_fit(data, config);
  const auto& loss = fit.report.objective_per_iter;
  ASSERT_EQ(loss.size(), 20u);
  EXPECT_LT(loss.front(), std::log(2.0));
  for (std::size_t t = 1; t < loss.size(); ++t) EXPECT_LT(loss[t], loss[t - 1]) << "epoch " << t;
  for (double p : sigmoid_proba(predict(fit.params, data.X))) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(SgdFit, DeterministicPerSeed) {
  Rng rng(2);
  LabeledData data{random_sparse(rng, 40, 8, 0.3), {}};
  for (std::size_t i = 0; i < 40; ++i) data.y.push_back(rng.normal());
  SolverConfig config;
  config.rank = 3;
  config.n_iter = 10;
  const auto a = sgd_fit(data, config);
  const auto b = sgd_fit(data, config);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.report.objective_per_iter, b.report.objective_per_iter);
  config.seed += 1;
  EXPECT_NE(sgd_fit(data, config).params, a.params);
}

TEST(SgdFit, TinyStepMovesBoundedly) {
  Rng rng(3);
  const std::size_t n = 30;
  LabeledData data{random_sparse(rng, n, 6, 0.4), {}};
  for (std::size_t i = 0; i < n; ++i) data.y.push_back(rng.normal());
  SolverConfig config;
  config.rank = 2;
  config.n_iter = 1;
  config.step_size = 1e-8;
  const auto start = init_params(6, config);
  double max_grad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<std::size_t> one{i};
    const LabeledData row{select_rows(data.X, one), {data.y[i]}};
    max_grad = std::max(max_grad, norm(loss_gradient(start, row, config)));
  }
  const auto fit = sgd_fit(data, config);
  auto moved = flatten(fit.params);
  const auto before = flatten(start);
  for (std::size_t j = 0; j < moved.size(); ++j) moved[j] -= before[j];
  // Gradients drift by O(step) during the epoch.
  EXPECT_LE(norm(moved), config.step_size * max_grad * static_cast<double>(n) * (1.0 + 1e-6));
  EXPECT_GT(norm(moved), 0.0);
}

TEST(SgdFit, DivergenceSuggestsSmallerStep) {
  const auto data = column_data({10.0, 20.0}, {2.0, 4.0});
  auto config = linear_config(10.0);
  config.n_iter = 500;
  try {
    sgd_fit(data, config);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("step_size"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(SgdFit, RejectsBadInput) {
  const auto data = column_data({1.0, 2.0}, {0.5, 1.0});
  SolverConfig config;
  config.task = Task::classification;
  EXPECT_THROW(sgd_fit(data, config), ContractViolation);
  config.task = Task::ranking;
  EXPECT_THROW(sgd_fit(data, config), ContractViolation);
  config.task = Task::regression;
  config.step_size = 0.0;
  EXPECT_THROW(sgd_fit(data, config), ContractViolation);
}

TEST(Bpr, IdenticalRowsOnlyDecay) {
  const std::vector<std::size_t> rows{0, 0, 1, 1}, cols{0, 2, 0, 2};
  const std::vector<double> vals{1.0, 0.5, 1.0, 0.5};
  const auto X = SparseRowMatrix::from_triplets(2, 3, rows, cols, vals);
  const RankingPairs pairs{{0, 1}};
  SolverConfig config;
  config.rank = 2;
  config.n_iter = 5;
  config.step_size = 0.1;
  Rng rng(4);
  const auto warm = random_params(rng, 3, 2);
  EXPECT_EQ(bpr_fit(X, pairs, config, warm).params, warm);

  config.set_l2_reg(0.5);
  config.n_iter = 1;
  const auto decayed = bpr_fit(X, pairs, config, warm).params;
  for (std::size_t i : {0u, 2u}) {
    EXPECT_DOUBLE_EQ(decayed.w[i], warm.w[i] * (1.0 - 0.1 * 0.5));
    for (std::size_t f = 0; f < 2; ++f)
      EXPECT_DOUBLE_EQ(decayed.v(f, i), warm.v(f, i) * (1.0 - 0.1 * 0.5));
  }
  EXPECT_EQ(decayed.w[1], warm.w[1]);
  EXPECT_EQ(decayed.w0, warm.w0);
}

TEST(Bpr, EqualScoresGiveHalfMultiplier) {
  // Two one-hot rows with equal scores: delta = 0.
  const std::vector<std::size_t> rows{0, 1}, cols{0, 1};
  const std::vector<double> vals{1.0, 1.0};
  const auto X = SparseRowMatrix::from_triplets(2, 2, rows, cols, vals);
  FMParams params(2, 0);
  params.w0 = 0.7;
  params.w = {0.3, 0.3};
  SolverConfig config;
  config.rank = 0;
  const auto g_ab = loss_gradient(params, X, RankingPairs{{0, 1}}, config);
  const auto g_ba = loss_gradient(params, X, RankingPairs{{1, 0}}, config);
  EXPECT_EQ(g_ab[1], -0.5);
  EXPECT_EQ(g_ab[2], 0.5);
  EXPECT_EQ(g_ab[0], 0.0);
  for (std::size_t j = 0; j < g_ab.size(); ++j) EXPECT_EQ(g_ab[j], -g_ba[j]);

  // One BPR step from here moves each weight by step * 0.5.
  config.n_iter = 1;
  config.step_size = 0.2;
  const auto fit = bpr_fit(X, RankingPairs{{0, 1}}, config, params);
  EXPECT_DOUBLE_EQ(fit.params.w[0], 0.3 + 0.1);
  EXPECT_DOUBLE_EQ(fit.params.w[1], 0.3 - 0.1);
  EXPECT_EQ(fit.report.objective_per_iter[0], log_sigmoid(0.0));
}

TEST(Bpr, SyntheticRankingAccuracy) {
  const auto task = testing::ranking_task(5, 20);
  SolverConfig config;
  config.task = Task::ranking;
  config.rank = 4;
  config.n_iter = 100;
  config.step_size = 0.05;
  const auto fit = bpr_fit(task.X, task.pairs, config);
  EXPECT_GE(pairwise_accuracy(fit.params, task.X, task.pairs), 0.95);
  EXPECT_GT(fit.report.objective_per_iter.back(), fit.report.objective_per_iter.front());
}

TEST(Bpr, RejectsBadPairs) {
  const auto task = testing::ranking_task(6, 5);
  SolverConfig config;
  EXPECT_THROW(bpr_fit(task.X, {}, config), ContractViolation);
  EXPECT_THROW(bpr_fit(task.X, RankingPairs{{0, 5}}, config), ContractViolation);
  EXPECT_THROW(bpr_fit(task.X, RankingPairs{{2, 2}}, config), ContractViolation);
}

TEST(Bpr, DeterministicPerSeed) {
  const auto task = testing::ranking_task(7, 10);
  SolverConfig config;
  config.rank = 2;
  config.n_iter = 5;
  EXPECT_EQ(bpr_fit(task.X, task.pairs, config).params, bpr_fit(task.X, task.pairs, config).params);
}

TEST(LossGradient, ZeroData) {
  const std::size_t n = 7;
  LabeledData data{SparseRowMatrix(n, 4, std::vector<std::size_t>(n + 1, 0), {}, {}),
                   std::vector<double>(n, 0.0)};
  Rng rng(8);
  const auto params = random_params(rng, 4, 3);
  SolverConfig config;
  config.rank = 3;
  const auto grad = loss_gradient(params, data, config);
  ASSERT_EQ(grad.size(), params.size());
  EXPECT_DOUBLE_EQ(grad[0], static_cast<double>(n) * params.w0);
  for (std::size_t j = 1; j < grad.size(); ++j) EXPECT_EQ(grad[j], 0.0);
}

TEST(LossGradient, MatchesFiniteDifferencesForEveryTask) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t p = 6, k = 3, n = 15;
    const auto params = random_params(rng, p, k, 0.5);
    SolverConfig config;
    config.rank = k;
    config.set_l2_reg(0.1 + rng.uniform());
    config.l2_reg_w0 = 0.1 + rng.uniform();

    LabeledData reg{random_sparse(rng, n, p, 0.5), {}};
    for (std::size_t i = 0; i < n; ++i) reg.y.push_back(rng.normal());
    config.task = Task::regression;
    const auto r = check_loss_gradient(params, reg, config, 1e-5);
    EXPECT_LT(r.max_relative_error, 1e-4);

    LabeledData cls = reg;
    for (double& y : cls.y) y = y > 0 ? 1.0 : -1.0;
    config.task = Task::classification;
    const auto c = check_loss_gradient(params, cls, config, 1e-5);
    EXPECT_LT(c.max_relative_error, 1e-4);

    RankingPairs pairs;
    for (int t = 0; t < 20; ++t) {
      const std::size_t a = rng.uniform_index(n);
      std::size_t b = rng.uniform_index(n - 1);
      if (b >= a) ++b;
      pairs.push_back({a, b});
    }
    config.task = Task::ranking;
    const auto b = check_loss_gradient(params, reg.X, pairs, config, 1e-5);
    EXPECT_LT(b.max_relative_error, 1e-4);
  }
}

TEST(Flatten, RoundTrip) {
  Rng rng(10);
  const auto params = random_params(rng, 5, 3);
  const auto flat = flatten(params);
  ASSERT_EQ(flat.size(), 1u + 5u + 15u);
  EXPECT_EQ(flat[0], params.w0);
  EXPECT_EQ(flat[1 + 5 + 2 * 5 + 4], params.v(2, 4));
  EXPECT_EQ(unflatten(flat, 5, 3), params);
  EXPECT_THROW(unflatten(flat, 5, 2), ContractViolation);
}

TEST(PairsCsv, ParsesWithAndWithoutHeader) {
  std::istringstream with_header("winner_row,loser_row\n0,1\n2, 3\n\n");
  EXPECT_EQ(parse_pairs_csv(with_header), (RankingPairs{{0, 1}, {2, 3}}));
  std::istringstream bare("4,5\n");
  EXPECT_EQ(parse_pairs_csv(bare), (RankingPairs{{4, 5}}));
  std::istringstream bad("0,1\n2;3\n");
  EXPECT_THROW(parse_pairs_csv(bad), ParseError);
  std::istringstream negative("0,-1\n");
  EXPECT_THROW(parse_pairs_csv(negative), ParseError);
}

}  // namespace
}  // namespace fastfm
