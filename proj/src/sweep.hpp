// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Shared single-coordinate sweep used by the ALS and Gibbs solvers.

#include <cstddef>
#include <span>

#include "fastfm/model.hpp"
#include "fastfm/sparse.hpp"

namespace fastfm::detail {

enum class Block { bias, linear, factor };

/// Identifies the scalar being updated. `factor` is only meaningful for
/// Block::factor.
struct Coordinate {
  Block block;
  std::size_t feature;
  std::size_t factor;
};

/**
 * Visits w0, w_i (ascending i), then V(f, i) (ascending f, then i). For each
 * scalar theta it computes, over the rows where it acts,
 *
 *     sum_h2 = sum_n h_n^2,   sum_he = sum_n h_n (y_hat_n - target_n)
 *
 * with h_n = d y_hat_n / d theta, asks `next(coord, theta, sum_h2, sum_he)` for
 * the new value and then patches y_hat and q in place.
 */
template <class Next>
void coordinate_sweep(FMParams& params, SampleCaches& caches, const SparseColMatrix& Xc,
                      std::span<const double> target, bool fit_bias, Next&& next) {
  const std::size_t n = caches.n_samples();
  const std::size_t p = params.n_features();
  double* y_hat = caches.y_hat.data();

  if (fit_bias) {
    double sum_e = 0.0;
    for (std::size_t row = 0; row < n; ++row) sum_e += y_hat[row] - target[row];
    const double old = params.w0;
    const double updated =
        next(Coordinate{Block::bias, 0, 0}, old, static_cast<double>(n), sum_e);
    const double delta = updated - old;
    params.w0 = updated;
    if (delta != 0.0)
      for (std::size_t row = 0; row < n; ++row) y_hat[row] += delta;
  }

  for (std::size_t i = 0; i < p; ++i) {
    const auto col = Xc.col(i);
    double sum_h2 = 0.0;
    double sum_he = 0.0;
    for (std::size_t a = 0; a < col.nnz(); ++a) {
      const std::size_t row = col.indices[a];
      const double h = col.values[a];
      sum_h2 += h * h;
      sum_he += h * (y_hat[row] - target[row]);
    }
    const double old = params.w[i];
    const double updated = next(Coordinate{Block::linear, i, 0}, old, sum_h2, sum_he);
    const double delta = updated - old;
    params.w[i] = updated;
    if (delta != 0.0)
      for (std::size_t a = 0; a < col.nnz(); ++a) y_hat[col.indices[a]] += delta * col.values[a];
  }

  for (std::size_t f = 0; f < params.rank(); ++f) {
    auto vf = params.factor(f);
    auto qf = caches.q_factor(f);
    for (std::size_t i = 0; i < p; ++i) {
      const auto col = Xc.col(i);
      const double old = vf[i];
      double sum_h2 = 0.0;
      double sum_he = 0.0;
      for (std::size_t a = 0; a < col.nnz(); ++a) {
        const std::size_t row = col.indices[a];
        const double x = col.values[a];
        const double h = x * (qf[row] - old * x);
        sum_h2 += h * h;
        sum_he += h * (y_hat[row] - target[row]);
      }
      const double updated = next(Coordinate{Block::factor, i, f}, old, sum_h2, sum_he);
      const double delta = updated - old;
      vf[i] = updated;
      if (delta != 0.0) {
        for (std::size_t a = 0; a < col.nnz(); ++a) {
          const std::size_t row = col.indices[a];
          const double x = col.values[a];
          const double h = x * (qf[row] - old * x);
          y_hat[row] += delta * h;
          qf[row] += delta * x;
        }
      }
    }
  }
}

}  // namespace fastfm::detail
