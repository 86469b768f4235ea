// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fastfm/als.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <string>

#include "fastfm/error.hpp"
#include "fastfm/special.hpp"
#include "sweep.hpp"

namespace fastfm {

namespace {

using detail::Block;
using detail::Coordinate;

constexpr double kStaleCacheTolerance = 1e-9;

double penalty_for(const Coordinate& c, const SolverConfig& config) {
  switch (c.block) {
    case Block::bias: return config.l2_reg_w0;
    case Block::linear: return config.l2_reg_w;
    case Block::factor: return config.l2_reg_V;
  }
  return 0.0;
}

// One exact coordinate-minimization sweep against `target`.
void als_sweep(FMParams& params, SampleCaches& caches, const SparseColMatrix& Xc,
               std::span<const double> target, const SolverConfig& config) {
  detail::coordinate_sweep(
      params, caches, Xc, target, config.fit_bias,
      [&](const Coordinate& c, double theta, double sum_h2, double sum_he) {
        if (sum_h2 == 0.0) return theta;
        const double lambda = penalty_for(c, config);
        const double updated = (theta * sum_h2 - sum_he) / (sum_h2 + lambda);
#ifndef NDEBUG
        // Change of the objective along this coordinate; exact for a quadratic.
        const double d = updated - theta;
        const double change =
            sum_he * d + 0.5 * sum_h2 * d * d + 0.5 * lambda * (updated * updated - theta * theta);
        assert(!(change > 1e-9 * (1.0 + std::abs(sum_he * theta))));
#endif
        return updated;
      });
}

void check_finite(const SampleCaches& caches, std::size_t sweep) {
  for (double v : caches.y_hat)
    if (!std::isfinite(v))
      throw DivergenceError("ALS diverged: non-finite prediction cache in sweep " +
                            std::to_string(sweep));
  for (double v : caches.q)
    if (!std::isfinite(v))
      throw DivergenceError("ALS diverged: non-finite factor cache in sweep " +
                            std::to_string(sweep));
}

double probit_objective(const SampleCaches& caches, const FMParams& params,
                        const std::vector<double>& y, const SolverConfig& config) {
  double nll = 0.0;
  for (std::size_t n = 0; n < y.size(); ++n) nll -= normal_log_cdf(y[n] * caches.y_hat[n]);
  return nll + l2_penalty(params, config);
}

SparseColMatrix column_view(const SparseRowMatrix& X, std::size_t n_features) {
  if (X.n_cols() > n_features)
    throw ContractViolation("design matrix has more columns than the model has features");
  return to_column_major(X.n_cols() == n_features ? X : with_n_cols(X, n_features));
}

// Runs `n_iter` iterations in place; `sweep_index0` only labels errors.
FitReport run_iterations(FMParams& params, SampleCaches& caches, const LabeledData& data,
                         const SolverConfig& config, std::size_t n_iter,
                         std::size_t sweep_index0) {
  const auto start = std::chrono::steady_clock::now();
  const SparseColMatrix Xc = column_view(data.X, params.n_features());
  const bool probit = config.task == Task::classification;
  std::vector<double> target = probit ? std::vector<double>(data.y.size()) : data.y;

  FitReport report;
  report.objective_per_iter.reserve(n_iter);
  for (std::size_t it = 0; it < n_iter; ++it) {
    if (probit)
      for (std::size_t n = 0; n < target.size(); ++n)
        target[n] = truncated_normal_mean(caches.y_hat[n], data.y[n]);
    als_sweep(params, caches, Xc, target, config);
    check_finite(caches, sweep_index0 + it + 1);
    report.objective_per_iter.push_back(probit ? probit_objective(caches, params, data.y, config)
                                               : als_objective(caches, params, target, config));
    ++report.n_iter_done;
  }
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

AlsFit fit_impl(const LabeledData& data, const SolverConfig& config,
                const std::optional<FMParams>& warm) {
  config.validate();
  data.validate();
  if (config.task == Task::classification) data.validate_binary_labels();
  FMParams params = warm ? *warm : init_params(data.X.n_cols(), config);
  if (warm) {
    check_warm_start(*warm, std::max(warm->n_features(), data.X.n_cols()), config.rank);
  }
  SampleCaches caches = build_caches(params, data.X);
  FitReport report = run_iterations(params, caches, data, config, config.n_iter, 0);
  return {std::move(params), std::move(caches), std::move(report)};
}

}  // namespace

double als_objective(const SampleCaches& caches, const FMParams& params,
                     const std::vector<double>& target, const SolverConfig& config) {
  double sq = 0.0;
  for (std::size_t n = 0; n < target.size(); ++n) {
    const double e = caches.y_hat[n] - target[n];
    sq += e * e;
  }
  return 0.5 * sq + l2_penalty(params, config);
}

AlsFit als_fit(const LabeledData& data, const SolverConfig& config,
               const std::optional<FMParams>& warm) {
  if (config.task != Task::regression)
    throw ContractViolation("als_fit expects task = regression");
  return fit_impl(data, config, warm);
}

AlsFit als_fit_classification(const LabeledData& data, const SolverConfig& config,
                              const std::optional<FMParams>& warm) {
  SolverConfig c = config;
  c.task = Task::classification;
  return fit_impl(data, c, warm);
}

AlsFit als_continue(AlsFit previous, const LabeledData& data, const SolverConfig& config,
                    std::size_t n_more_iter) {
  config.validate();
  data.validate();
  if (config.task == Task::ranking) throw ContractViolation("ALS does not support ranking");
  if (config.task == Task::classification) data.validate_binary_labels();
  check_warm_start(previous.params, previous.params.n_features(), previous.params.rank());
  if (previous.caches.n_samples() != data.X.n_rows() ||
      cache_deviation(previous.caches, previous.params, data.X) > kStaleCacheTolerance)
    throw ContractViolation("als_continue: caches are stale for these parameters and data");
  FitReport more = run_iterations(previous.params, previous.caches, data, config, n_more_iter,
                                  previous.report.n_iter_done);
  previous.report.append(more);
  return previous;
}

}  // namespace fastfm
