// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fastfm/model.hpp"
#include "fastfm/rng.hpp"
#include "fastfm/sparse.hpp"

namespace fastfm {

/// Normal-gamma prior shared by one block of parameters:
/// theta ~ N(mu, 1/lambda), mu ~ N(mu0, 1/(gamma0 lambda)), lambda ~ Gamma(alpha_lambda, beta_lambda).
struct HyperGroup {
  std::string name;
  double lambda = 1.0;
  double mu = 0.0;
};

/// Hyperprior constants. alpha ~ Gamma(alpha0, beta0) is the noise precision.
struct HyperPrior {
  double alpha0 = 1.0;
  double beta0 = 1.0;
  double alpha_lambda = 1.0;
  double beta_lambda = 1.0;
  double gamma0 = 1.0;
  double mu0 = 0.0;
};

/// Test hooks. Production code leaves these at their defaults.
struct McmcHooks {
  /// When false, alpha and every group's (lambda, mu) stay at their initial values.
  bool sample_hyper = true;
  double initial_alpha = 1.0;
  double initial_lambda = 1.0;
  /// Multiplies the conditional variance of every parameter draw. Anything
  /// other than 1 makes the sampler incorrect (used for mutation tests).
  double theta_variance_scale = 1.0;
};

/// One entry per iteration for each series.
struct McmcTraces {
  std::vector<std::string> group_names;
  std::vector<double> alpha;
  std::vector<std::vector<double>> lambda;  // [group][iteration]
  std::vector<std::vector<double>> mu;      // [group][iteration]
  std::vector<double> sigma_w;              // lambda_w^{-1/2}
};

/**
 * Everything needed to continue a Gibbs chain: current parameters and caches,
 * hyperparameters, generator state, prediction accumulators and traces.
 *
 * Groups are ordered w0, w, then one per latent dimension ("v_0", ...).
 */
struct McmcState {
  Task task = Task::regression;
  bool fit_bias = true;
  FMParams params;
  SampleCaches caches;
  /// Augmented targets for probit classification; empty for regression.
  std::vector<double> latent;
  double alpha = 1.0;
  std::vector<HyperGroup> groups;
  HyperPrior prior;
  McmcHooks hooks;
  Rng rng;
  std::vector<double> pred_sum;
  std::size_t n_samples_accumulated = 0;
  std::size_t n_iter_done = 0;
  McmcTraces traces;
  std::size_t n_train_rows = 0;
  std::uint64_t test_fingerprint = 0;
};

struct McmcResult {
  std::vector<double> y_pred;
  McmcState state;
  FitReport report;
};

/// Called after every completed iteration.
using McmcObserver = std::function<void(const McmcState&)>;

/**
 * Draws initial parameters (w0 = 0, w = 0, V ~ N(0, init_std^2) from
 * config.seed, or `warm`), sets alpha and every lambda to the hook's initial
 * values and every mu to 0. For classification, also draws the initial latent
 * targets. Generator stream: derive_seed(config.seed, 1).
 */
McmcState mcmc_initialize(const LabeledData& train, const SparseRowMatrix& X_test,
                          const SolverConfig& config,
                          const std::optional<FMParams>& warm = std::nullopt,
                          const McmcHooks& hooks = {});

/**
 * Bayesian FM regression by Gibbs sampling with fit_predict semantics.
 *
 * Without `state` a fresh chain is initialized; with `state` the chain
 * continues. Either way config.n_iter iterations are run (0 is allowed). Each
 * iteration draws, in this order and from the state's generator:
 *   1. alpha ~ Gamma(alpha0 + N/2, beta0 + sum e^2 / 2)
 *   2. for each group: lambda, then mu, from their full conditionals
 *   3. every parameter in sweep order (w0, w, V by factor then feature)
 *      from its Gaussian full conditional
 * and then adds predict(params, X_test) to the accumulator.
 *
 * y_pred is the average of the accumulated draws, or the current model's
 * prediction when nothing has been accumulated yet. Running n iterations at
 * once and n single-iteration calls with the carried state give identical
 * results. A state only accepts the test matrix it was created with.
 */
McmcResult mcmc_fit_predict(const LabeledData& train, const SparseRowMatrix& X_test,
                            const SolverConfig& config,
                            std::optional<McmcState> state = std::nullopt,
                            const McmcObserver& observer = {});

/// Probit classification. Latent targets z_n ~ N(y_hat_n, 1) truncated to
/// sign(z_n) = y_n replace y and the noise precision is fixed at 1; the latent
/// draws come last in each iteration. Accumulates Phi(y_hat_test), so the
/// returned values are probabilities.
McmcResult mcmc_fit_predict_classification(const LabeledData& train,
                                           const SparseRowMatrix& X_test,
                                           const SolverConfig& config,
                                           std::optional<McmcState> state = std::nullopt,
                                           const McmcObserver& observer = {});

/// Drops accumulated predictions (burn-in). Traces and chain are untouched.
void reset_accumulator(McmcState& state);

McmcTraces get_traces(const McmcState& state);

/// [alpha, lambda_w, mu_w, lambda_v_0..k-1, mu_v_0..k-1] for the current state.
std::vector<double> hyper_param_vector(const McmcState& state);

/// CSV `iter,alpha,lambda_w,mu_w,lambda_v_0..,mu_v_0..,sigma_w`, iter from 1.
void write_trace_csv(std::ostream& out, const McmcTraces& traces);

/// Hash of a matrix' structure and values, used to pin a chain to its test set.
std::uint64_t matrix_fingerprint(const SparseRowMatrix& X);

}  // namespace fastfm
