// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fastfm/als.hpp"
#include "fastfm/error.hpp"
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
    if (x[i] == 0.0) continue;
    rows.push_back(i);
    cols.push_back(0);
    vals.push_back(x[i]);
  }
  return {SparseRowMatrix::from_triplets(x.size(), 1, rows, cols, vals), y};
}

LabeledData random_regression(Rng& rng, std::size_t n, std::size_t p, std::size_t k,
                              double density) {
  LabeledData d{random_sparse(rng, n, p, density), {}};
  const auto truth = random_params(rng, p, k, 0.5);
  d.y = predict(truth, d.X);
  for (double& y : d.y) y += 0.1 * rng.normal();
  return d;
}

double max_abs_diff(const FMParams& a, const FMParams& b) {
  double worst = std::abs(a.w0 - b.w0);
  for (std::size_t i = 0; i < a.w.size(); ++i) worst = std::max(worst, std::abs(a.w[i] - b.w[i]));
  for (std::size_t i = 0; i < a.V.size(); ++i) worst = std::max(worst, std::abs(a.V[i] - b.V[i]));
  return worst;
}

double accuracy(const std::vector<double>& score, const std::vector<double>& y) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hits += (score[i] > 0.0) == (y[i] > 0.0);
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

TEST(AlsFit, OrdinaryLeastSquaresInOneSweep) {
  const auto data = column_data({1.0, 2.0}, {2.0, 4.0});
  SolverConfig config;
  config.rank = 0;
  config.n_iter = 1;
  config.fit_bias = false;
  const auto fit = als_fit(data, config);
  // sum(x y) / sum(x^2)
  EXPECT_EQ(fit.params.w[0], 10.0 / 5.0);
  EXPECT_EQ(fit.params.w0, 0.0);
  EXPECT_EQ(fit.report.n_iter_done, 1u);
  EXPECT_EQ(fit.report.objective_per_iter.size(), 1u);
}

TEST(AlsFit, OrdinaryLeastSquaresWithBiasConverges) {
  // y = 1 + 2x exactly.
  const auto data = column_data({1.0, 2.0, 3.0, 4.0}, {3.0, 5.0, 7.0, 9.0});
  SolverConfig config;
  config.rank = 0;
  config.n_iter = 2000;
  const auto fit = als_fit(data, config);
  EXPECT_NEAR(fit.params.w[0], 2.0, 1e-9);
  EXPECT_NEAR(fit.params.w0, 1.0, 1e-9);
}

TEST(AlsFit, ZeroIsAFixedPoint) {
  Rng rng(1);
  LabeledData data{random_sparse(rng, 30, 10, 0.3), std::vector<double>(30, 0.0)};
  SolverConfig config;
  config.rank = 3;
  config.n_iter = 5;
  const auto fit = als_fit(data, config, FMParams(10, 3));
  EXPECT_EQ(fit.params, FMParams(10, 3));
}

TEST(AlsFit, RankTwoOneHotRecovery) {
  const auto mf = testing::one_hot_mf(7, 100, 50, 2000, 2, 0.0, 0.0);
  SolverConfig config;
  config.rank = 2;
  config.n_iter = 50;
  config.init_std = 0.1;
  const auto p = mf.train.X.n_cols();
  const double initial = testing::rmse(predict(init_params(p, config), mf.train.X), mf.train.y);
  const auto fit = als_fit(mf.train, config);
  const double final_rmse = testing::rmse(predict(fit.params, mf.train.X), mf.train.y);
  EXPECT_LE(final_rmse, 0.01 * initial) << "initial " << initial << " final " << final_rmse;
}

TEST(AlsFit, ObjectiveIsMonotone) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = random_regression(rng, 60, 12, 3, 0.3);
    SolverConfig config;
    config.rank = 3;
    config.n_iter = 15;
    config.seed = 100 + trial;
    config.set_l2_reg(0.1 * trial);
    config.l2_reg_w0 = 0.05 * trial;
    const auto start = init_params(12, config);
    const double initial = als_objective(build_caches(start, data.X), start, data.y, config);
    const auto fit = als_fit(data, config);
    double prev = initial;
    for (double obj : fit.report.objective_per_iter) {
      EXPECT_LE(obj, prev * (1.0 + 1e-12) + 1e-12);
      prev = obj;
    }
  }
}

TEST(AlsFit, CachesStayCoherent) {
  Rng rng(3);
  const auto data = random_regression(rng, 100, 20, 4, 0.2);
  SolverConfig config;
  config.rank = 4;
  config.n_iter = 30;
  config.set_l2_reg(0.5);
  const auto fit = als_fit(data, config);
  EXPECT_LT(cache_deviation(fit.caches, fit.params, data.X), 1e-9);
}

TEST(AlsFit, HugePenaltyShrinksToMean) {
  Rng rng(4);
  const auto data = random_regression(rng, 50, 8, 2, 0.4);
  SolverConfig config;
  config.rank = 2;
  config.n_iter = 5;
  config.set_l2_reg(1e12);
  const auto fit = als_fit(data, config);
  double norm = 0.0;
  for (double w : fit.params.w) norm += w * w;
  EXPECT_LT(std::sqrt(norm), 1e-6);
  const double mean = std::accumulate(data.y.begin(), data.y.end(), 0.0) / 50.0;
  EXPECT_NEAR(fit.params.w0, mean, 1e-6);
}

TEST(AlsFit, AllZeroColumnKeepsWarmValues) {
  Rng rng(5);
  auto data = random_regression(rng, 40, 6, 2, 0.5);
  data.X = with_n_cols(data.X, 8);  // columns 6 and 7 are empty
  SolverConfig config;
  config.rank = 2;
  config.n_iter = 3;
  config.set_l2_reg(1.0);
  const auto warm = random_params(rng, 8, 2);
  const auto fit = als_fit(data, config, warm);
  for (std::size_t i : {6u, 7u}) {
    EXPECT_EQ(fit.params.w[i], warm.w[i]);
    for (std::size_t f = 0; f < 2; ++f) EXPECT_EQ(fit.params.v(f, i), warm.v(f, i));
  }
}

TEST(AlsFit, DivergenceNamesSweep) {
  const auto data = column_data({1e300, 1.0}, {1.0, 1.0});
  SolverConfig config;
  config.rank = 0;
  config.n_iter = 3;
  config.fit_bias = false;
  try {
    als_fit(data, config);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("sweep 1"), std::string::npos) << e.what();
  }
}

TEST(AlsFit, RejectsBadInput) {
  Rng rng(6);
  const auto data = random_regression(rng, 10, 4, 1, 0.5);
  SolverConfig config;
  config.rank = 2;
  EXPECT_THROW(als_fit(data, config, FMParams(4, 3)), ContractViolation);
  EXPECT_THROW(als_fit(data, config, FMParams(3, 2)), ContractViolation);
  SolverConfig cls = config;
  cls.task = Task::classification;
  EXPECT_THROW(als_fit(data, cls), ContractViolation);
  EXPECT_THROW(als_fit_classification(data, config), ContractViolation);
  config.l2_reg_w = -1.0;
  EXPECT_THROW(als_fit(data, config), ContractViolation);
}

TEST(AlsClassification, FirstTargetAtZeroIsTruncatedMean) {
  // No features: the first sweep sets w0 to the mean working target.
  LabeledData data;
  data.X = SparseRowMatrix(4, 1, {0, 0, 0, 0, 0}, {}, {});
  data.y = {1.0, 1.0, 1.0, 1.0};
  SolverConfig config;
  config.rank = 0;
  config.n_iter = 1;
  const auto fit = als_fit_classification(data, config);
  EXPECT_NEAR(fit.params.w0, 0.7978845608028654, 1e-12);
  EXPECT_NEAR(fit.params.w0, std::sqrt(2.0 / M_PI), 1e-12);
}

TEST(AlsClassification, LabelFlipNegatesLinearModel) {
  Rng rng(7);
  LabeledData data{random_sparse(rng, 50, 6, 0.5), {}};
  for (std::size_t i = 0; i < 50; ++i) data.y.push_back(rng.uniform() < 0.5 ? -1.0 : 1.0);
  LabeledData flipped = data;
  for (double& y : flipped.y) y = -y;
  SolverConfig config;
  config.rank = 0;
  config.n_iter = 10;
  config.set_l2_reg(0.3);
  const auto a = als_fit_classification(data, config);
  const auto b = als_fit_classification(flipped, config);
  EXPECT_NEAR(a.params.w0, -b.params.w0, 1e-12);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(a.params.w[i], -b.params.w[i], 1e-12);
  const auto ya = predict(a.params, data.X);
  const auto yb = predict(b.params, data.X);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_NEAR(ya[i], -yb[i], 1e-12);
}

TEST(AlsClassification, SeparableToyReachesFullAccuracy) {
  Rng rng(8);
  std::vector<std::size_t> rows, cols;
  std::vector<double> vals;
  LabeledData data;
  for (std::size_t n = 0; n < 60; ++n) {
    double a, b;
    do {
      a = 4.0 * rng.uniform() - 2.0;
      b = 4.0 * rng.uniform() - 2.0;
    } while (std::abs(a - 0.5 * b) < 0.2);
    rows.insert(rows.end(), {n, n});
    cols.insert(cols.end(), {0, 1});
    vals.insert(vals.end(), {a, b});
    data.y.push_back(a - 0.5 * b > 0.0 ? 1.0 : -1.0);
  }
  data.X = SparseRowMatrix::from_triplets(60, 2, rows, cols, vals);
  SolverConfig config;
  config.rank = 2;
  config.n_iter = 20;
  const auto fit = als_fit_classification(data, config);
  EXPECT_EQ(accuracy(predict(fit.params, data.X), data.y), 1.0);
  for (double p : probit_proba(predict(fit.params, data.X))) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(AlsClassification, ObjectiveIsFiniteAndDecreasesOverall) {
  Rng rng(9);
  LabeledData data{random_sparse(rng, 80, 10, 0.3), {}};
  const auto truth = random_params(rng, 10, 2);
  for (double s : predict(truth, data.X)) data.y.push_back(s > 0 ? 1.0 : -1.0);
  SolverConfig config;
  config.rank = 2;
  config.n_iter = 30;
  config.set_l2_reg(0.5);
  const auto fit = als_fit_classification(data, config);
  for (double obj : fit.report.objective_per_iter) EXPECT_TRUE(std::isfinite(obj));
  EXPECT_LT(fit.report.objective_per_iter.back(), fit.report.objective_per_iter.front());
}

TEST(AlsContinue, NoOpContinuation) {
  Rng rng(10);
  const auto data = random_regression(rng, 50, 10, 3, 0.3);
  SolverConfig config;
  config.rank = 3;
  config.n_iter = 10;
  const auto fit = als_fit(data, config);
  const auto more = als_continue(fit, data, config, 0);
  EXPECT_EQ(more.params, fit.params);
  EXPECT_EQ(more.report.n_iter_done, 10u);
}

TEST(AlsContinue, SplitRunIsBitIdentical) {
  Rng rng(11);
  const auto data = random_regression(rng, 80, 15, 3, 0.25);
  SolverConfig config;
  config.rank = 3;
  config.set_l2_reg(0.2);
  config.n_iter = 10;
  const auto whole = als_fit(data, config);
  config.n_iter = 5;
  const auto half = als_fit(data, config);
  const auto split = als_continue(half, data, config, 5);
  EXPECT_EQ(max_abs_diff(split.params, whole.params), 0.0);
  EXPECT_EQ(split.report.objective_per_iter, whole.report.objective_per_iter);
  EXPECT_EQ(split.report.n_iter_done, 10u);
}

TEST(AlsContinue, SplitClassificationRunIsBitIdentical) {
  Rng rng(12);
  LabeledData data{random_sparse(rng, 60, 8, 0.3), {}};
  for (std::size_t i = 0; i < 60; ++i) data.y.push_back(rng.uniform() < 0.4 ? -1.0 : 1.0);
  SolverConfig config;
  config.task = Task::classification;
  config.rank = 2;
  config.set_l2_reg(0.5);
  config.n_iter = 8;
  const auto whole = als_fit_classification(data, config);
  config.n_iter = 3;
  const auto split = als_continue(als_fit_classification(data, config), data, config, 5);
  EXPECT_EQ(split.params, whole.params);
}

TEST(AlsContinue, PenaltyChangeMatchesFreshWarmRun) {
  Rng rng(13);
  const auto data = random_regression(rng, 70, 12, 2, 0.3);
  SolverConfig config;
  config.rank = 2;
  config.n_iter = 5;
  config.set_l2_reg(0.1);
  const auto first = als_fit(data, config);
  SolverConfig stronger = config;
  stronger.set_l2_reg(2.0);
  const auto continued = als_continue(first, data, stronger, 5);
  const auto fresh = als_fit(data, stronger, first.params);
  // The carried caches and a rebuild differ only by rounding.
  EXPECT_LT(max_abs_diff(continued.params, fresh.params), 1e-10);
}

TEST(AlsContinue, StaleCachesAreRejected) {
  Rng rng(14);
  const auto data = random_regression(rng, 30, 6, 2, 0.4);
  SolverConfig config;
  config.rank = 2;
  config.n_iter = 3;
  auto fit = als_fit(data, config);
  fit.params.w[0] += 0.5;
  EXPECT_THROW(als_continue(fit, data, config, 1), ContractViolation);
  auto other = als_fit(data, config);
  other.caches.y_hat.pop_back();
  EXPECT_THROW(als_continue(other, data, config, 1), ContractViolation);
}

TEST(AlsFit, Deterministic) {
  Rng rng(15);
  const auto data = random_regression(rng, 40, 9, 2, 0.3);
  SolverConfig config;
  config.rank = 2;
  config.n_iter = 7;
  EXPECT_EQ(als_fit(data, config).params, als_fit(data, config).params);
}

}  // namespace
}  // namespace fastfm
