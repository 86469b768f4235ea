// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fastfm/mcmc.hpp"
#include "fastfm/model.hpp"
#include "fastfm/sgd.hpp"

namespace fastfm {

struct FdCheckResult {
  /// max_j |analytic_j - numeric_j| / max(|analytic_j|, |numeric_j|, 1e-12)
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  /// False when floating-point cancellation at this epsilon could by itself
  /// exceed 1e-4 relative error on some coordinate.
  bool reliable = true;
};

using LossFn = std::function<double(std::span<const double>)>;

/// Central differences (L(theta + eps e_j) - L(theta - eps e_j)) / 2 eps for every
/// coordinate, compared against `analytic`. Throws DivergenceError if the loss
/// is non-finite at a perturbed point.
FdCheckResult finite_difference_check(const LossFn& loss, std::span<const double> theta,
                                      std::span<const double> analytic, double epsilon);

/// finite_difference_check of loss_gradient against task_loss.
FdCheckResult check_loss_gradient(const FMParams& params, const LabeledData& data,
                                  const SolverConfig& config, double epsilon = 1e-5);
FdCheckResult check_loss_gradient(const FMParams& params, const SparseRowMatrix& X,
                                  const RankingPairs& pairs, const SolverConfig& config,
                                  double epsilon = 1e-5);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against Uniform(0, 1) with the
/// asymptotic Kolmogorov p-value (Stephens' small-sample correction).
KsResult ks_test_uniform(std::span<const double> samples);

/// Fraction of draws strictly below `truth` plus half the fraction equal to it.
double posterior_quantile(std::span<const double> draws, double truth);

struct PosteriorQuantileConfig {
  std::size_t n_features = 5;
  std::size_t rank = 2;
  std::size_t n_samples = 40;
  std::size_t n_replications = 200;
  std::size_t n_gibbs_iter = 500;
  /// Leading draws of each chain excluded from the quantiles.
  std::size_t burn_in = 100;
  /// Probability that a design-matrix entry is nonzero; nonzeros are N(0, 1).
  double density = 0.6;
  std::uint64_t seed = 1;
  /// Sampler hooks (only theta_variance_scale is meaningful here).
  McmcHooks hooks;
  int n_threads = 1;
};

struct PosteriorQuantileReport {
  /// Names of the checked scalars, in the order they appear per replication.
  std::vector<std::string> quantity_names;
  /// Pooled quantiles of successful replications, replication-major.
  std::vector<double> quantiles;
  /// Index of each successful replication, in the order used by `quantiles`.
  std::vector<std::size_t> replications;
  KsResult ks;
  std::size_t n_replications = 0;
  std::size_t n_failed = 0;
};

/**
 * Simulation-based calibration of the Gibbs sampler. Replication r uses the
 * generator derive_seed(seed, r): it draws the noise precision, every group's
 * (lambda, mu) and all parameters from the sampler's own prior, simulates a
 * design matrix and targets, runs mcmc_fit_predict and records the quantile of
 * each true scalar among its post-burn-in draws.
 *
 * Checked scalars: w0, each w_i, each pairwise interaction <v_i, v_j> (i < j),
 * and the noise precision. The factors themselves are only identified up to
 * sign and order, so they are checked through their inner products.
 *
 * A replication whose sampler diverges counts as failed; more than 5% failed
 * replications throws. Replications run in parallel when n_threads > 1 and
 * the result does not depend on the thread count.
 */
PosteriorQuantileReport posterior_quantile_run(const PosteriorQuantileConfig& config);

/// CSV `replication,quantity,quantile`.
void write_quantiles_csv(std::ostream& out, const PosteriorQuantileReport& report);

}  // namespace fastfm
