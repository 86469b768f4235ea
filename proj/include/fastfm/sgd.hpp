// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fastfm/model.hpp"
#include "fastfm/sparse.hpp"

namespace fastfm {

/// Row `winner` should be ranked above row `loser`.
struct RankingPair {
  std::size_t winner;
  std::size_t loser;

  bool operator==(const RankingPair&) const = default;
};
using RankingPairs = std::vector<RankingPair>;

/// Throws ContractViolation on out-of-range or self-paired rows.
void validate_pairs(std::span<const RankingPair> pairs, std::size_t n_rows);

/// CSV `winner_row,loser_row`, 0-based. A first line that is not numeric is
/// treated as a header.
RankingPairs parse_pairs_csv(std::istream& in);
RankingPairs read_pairs_file(const std::string& path);

struct SgdFit {
  FMParams params;
  FitReport report;
};

struct SgdHooks {
  /// Replace the per-sample pass by one full-batch gradient step per epoch,
  /// theta <- theta - step_size * loss_gradient(theta).
  bool full_batch = false;
};

/**
 * Plain SGD with a constant step size. Each epoch visits the rows in a freshly
 * shuffled order (stream derive_seed(seed, 2)) and for every parameter acting on
 * the row applies
 *
 *     theta <- theta - step_size * (g * h + lambda_theta * theta)
 *
 * with h = d y_hat / d theta and g = y_hat - y (regression) or
 * g = -y sigma(-y y_hat) (classification, labels -1/+1).
 *
 * report.objective_per_iter holds the training loss after each epoch: mean
 * squared error for regression, mean logistic loss for classification.
 */
SgdFit sgd_fit(const LabeledData& data, const SolverConfig& config,
               const std::optional<FMParams>& warm = std::nullopt, const SgdHooks& hooks = {});

/**
 * Pairwise BPR. Each step draws a pair uniformly with replacement (stream
 * derive_seed(seed, 3)), sets delta = y_hat_winner - y_hat_loser and ascends
 * ln sigma(delta) - penalty over the parameters of features present in either
 * row. w0 cancels in delta and is not updated. An epoch is |pairs| steps;
 * report.objective_per_iter holds the mean ln sigma(delta) over the epoch's draws.
 */
SgdFit bpr_fit(const SparseRowMatrix& X, const RankingPairs& pairs, const SolverConfig& config,
               const std::optional<FMParams>& warm = std::nullopt);

/// (w0, w, V factor-major) as one vector.
std::vector<double> flatten(const FMParams& params);
FMParams unflatten(std::span<const double> flat, std::size_t n_features, std::size_t rank);

/// Full-batch regularized loss for regression (sum of e^2 / 2) or
/// classification (sum of logistic losses), selected by config.task.
double task_loss(const FMParams& params, const LabeledData& data, const SolverConfig& config);
/// -sum over pairs of ln sigma(delta) plus the penalty.
double task_loss(const FMParams& params, const SparseRowMatrix& X, const RankingPairs& pairs,
                 const SolverConfig& config);

/// Analytic gradient of task_loss, laid out like flatten().
std::vector<double> loss_gradient(const FMParams& params, const LabeledData& data,
                                  const SolverConfig& config);
std::vector<double> loss_gradient(const FMParams& params, const SparseRowMatrix& X,
                                  const RankingPairs& pairs, const SolverConfig& config);

/// Fraction of pairs with y_hat_winner > y_hat_loser.
double pairwise_accuracy(const FMParams& params, const SparseRowMatrix& X,
                         const RankingPairs& pairs);

}  // namespace fastfm
