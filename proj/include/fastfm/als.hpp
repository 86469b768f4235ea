// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>

#include "fastfm/model.hpp"
#include "fastfm/sparse.hpp"

namespace fastfm {

/// Result of an ALS run. `caches` stay consistent with `params` on `data` and
/// can be handed to als_continue.
struct AlsFit {
  FMParams params;
  SampleCaches caches;
  FitReport report;
};

/**
 * Coordinate descent on the squared loss
 *
 *     0.5 * sum_n (y_hat_n - y_n)^2 + 0.5 * (l2_w0 w0^2 + l2_w |w|^2 + l2_V |V|^2).
 *
 * Each sweep minimizes exactly over w0, then w_i for ascending i, then V(f, i)
 * for ascending f and i, so the objective never increases. A parameter whose
 * samples all have zero sensitivity is left unchanged.
 *
 * `config.n_iter` sweeps are run. report.objective_per_iter holds the
 * regularized objective after each sweep.
 */
AlsFit als_fit(const LabeledData& data, const SolverConfig& config,
               const std::optional<FMParams>& warm = std::nullopt);

/**
 * Probit classification by MAP estimation. Every outer iteration replaces the
 * targets by the mean of a unit-variance normal centered at y_hat and truncated
 * to the side given by the label, then runs one regression sweep against them.
 * Labels must be -1/+1. report.objective_per_iter holds
 * -sum_n ln Phi(y_n y_hat_n) + penalty. Use probit_proba for probabilities.
 */
AlsFit als_fit_classification(const LabeledData& data, const SolverConfig& config,
                              const std::optional<FMParams>& warm = std::nullopt);

/// Runs `n_more_iter` further iterations from a previous result (regression or
/// classification per config.task). The caches are verified against a rebuild
/// and used as is, so splitting a run gives bit-identical parameters. `config`
/// may change regularization between calls.
AlsFit als_continue(AlsFit previous, const LabeledData& data, const SolverConfig& config,
                    std::size_t n_more_iter);

/// Regularized squared-loss objective for the current caches.
double als_objective(const SampleCaches& caches, const FMParams& params,
                     const std::vector<double>& target, const SolverConfig& config);

}  // namespace fastfm
