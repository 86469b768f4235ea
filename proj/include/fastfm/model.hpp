// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fastfm/sparse.hpp"

namespace fastfm {

enum class Task { regression, classification, ranking };

/**
 * Second-order factorization machine parameters for p features and rank k.
 *
 * The latent factors are stored factor-major: V is k x p and v(f, i) is entry
 * f of feature i's latent vector. Solvers sweep one factor f at a time over
 * all features, which walks V contiguously.
 */
struct FMParams {
  double w0 = 0.0;
  std::vector<double> w;
  std::vector<double> V;

  FMParams() = default;
  FMParams(std::size_t n_features, std::size_t rank)
      : w(n_features, 0.0), V(n_features * rank, 0.0), rank_(rank) {}

  std::size_t n_features() const noexcept { return w.size(); }
  std::size_t rank() const noexcept { return rank_; }

  double& v(std::size_t f, std::size_t i) noexcept { return V[f * w.size() + i]; }
  double v(std::size_t f, std::size_t i) const noexcept { return V[f * w.size() + i]; }
  std::span<double> factor(std::size_t f) noexcept {
    return std::span(V).subspan(f * w.size(), w.size());
  }
  std::span<const double> factor(std::size_t f) const noexcept {
    return std::span(V).subspan(f * w.size(), w.size());
  }

  /// Number of scalars: 1 + p + k*p.
  std::size_t size() const noexcept { return 1 + w.size() + V.size(); }

  /// Throws ContractViolation if shapes disagree or any entry is non-finite.
  void validate() const;

  bool operator==(const FMParams&) const = default;

 private:
  std::size_t rank_ = 0;
};

/// Knobs shared by every solver. Not every field is read by every solver.
struct SolverConfig {
  std::size_t rank = 8;
  std::size_t n_iter = 100;
  double init_std = 0.1;
  double l2_reg_w = 0.0;
  double l2_reg_V = 0.0;
  double l2_reg_w0 = 0.0;
  double step_size = 0.01;
  std::uint64_t seed = 123;
  Task task = Task::regression;
  /// When false, w0 is held at its initial value and never updated.
  bool fit_bias = true;

  /// Single-knob regularization: sets both l2_reg_w and l2_reg_V.
  SolverConfig& set_l2_reg(double lambda) {
    l2_reg_w = lambda;
    l2_reg_V = lambda;
    return *this;
  }

  /// Throws ContractViolation on negative regularization, negative init_std
  /// or a non-positive step size.
  void validate() const;
};

/// Per-sample state kept in sync with the parameters during a sweep.
/// q[f * n + row] = sum_i V(f, i) * x_row[i].
struct SampleCaches {
  std::vector<double> y_hat;
  std::vector<double> q;

  std::size_t n_samples() const noexcept { return y_hat.size(); }
  std::span<double> q_factor(std::size_t f) noexcept {
    return std::span(q).subspan(f * y_hat.size(), y_hat.size());
  }
  std::span<const double> q_factor(std::size_t f) const noexcept {
    return std::span(q).subspan(f * y_hat.size(), y_hat.size());
  }
};

/// Per-iteration record returned by every solver.
struct FitReport {
  std::vector<double> objective_per_iter;
  std::size_t n_iter_done = 0;
  double wall_time = 0.0;

  void append(const FitReport& more);
};

/// w0 = 0, w = 0, V ~ N(0, init_std^2) i.i.d. drawn factor-major from Rng(seed).
FMParams init_params(std::size_t n_features, const SolverConfig& config);

/// Literal pairwise double loop over the nonzeros of x. Reference oracle.
double predict_naive(const FMParams& params, const SparseVectorView& x);

/// Linear-time prediction of a single row.
double predict_row(const FMParams& params, const SparseVectorView& x);

/// Row-parallel prediction (OpenMP). n_threads <= 1 runs on the calling thread.
/// Results are identical for every thread count.
std::vector<double> predict(const FMParams& params, const SparseRowMatrix& X,
                            int n_threads = 1);

/// Single-threaded prediction, the reference for `predict`.
std::vector<double> predict_serial(const FMParams& params, const SparseRowMatrix& X);

/// Phi(y_hat) elementwise.
std::vector<double> probit_proba(std::span<const double> y_hat);
/// sigma(y_hat) elementwise.
std::vector<double> sigmoid_proba(std::span<const double> y_hat);

SampleCaches build_caches(const FMParams& params, const SparseRowMatrix& X, int n_threads = 1);

/// Largest relative deviation between `caches` and a from-scratch rebuild,
/// using max(|a|, |b|, 1) as the denominator.
double cache_deviation(const SampleCaches& caches, const FMParams& params,
                       const SparseRowMatrix& X);

/// 0.5 * ||params||^2 weighted by the per-block penalties in `config`.
double l2_penalty(const FMParams& params, const SolverConfig& config);

/// Shape and finiteness check of a warm start against the expected dimensions.
void check_warm_start(const FMParams& warm, std::size_t n_features, std::size_t rank);

}  // namespace fastfm
