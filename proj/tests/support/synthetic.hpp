// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Data generators shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fastfm/model.hpp"
#include "fastfm/rng.hpp"
#include "fastfm/sgd.hpp"
#include "fastfm/sparse.hpp"

namespace fastfm::testing {

/// n x p matrix whose entries are nonzero with probability `density`, values N(0, 1).
inline SparseRowMatrix random_sparse(Rng& rng, std::size_t n, std::size_t p, double density) {
  std::vector<std::size_t> rows, cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j)
      if (rng.uniform() < density) {
        rows.push_back(i);
        cols.push_back(j);
        vals.push_back(rng.normal());
      }
  return SparseRowMatrix::from_triplets(n, p, rows, cols, vals);
}

/// Parameters with every entry N(0, scale^2).
inline FMParams random_params(Rng& rng, std::size_t p, std::size_t k, double scale = 1.0) {
  FMParams params(p, k);
  params.w0 = scale * rng.normal();
  for (double& w : params.w) w = scale * rng.normal();
  for (double& v : params.V) v = scale * rng.normal();
  return params;
}

/// One-hot matrix factorization data: row = (user, item) with features
/// user and n_users + item set to 1. Ratings follow
/// bias + b_user + b_item + <u_user, v_item> + noise.
struct OneHotMF {
  LabeledData train;
  LabeledData test;
  std::size_t n_users;
  std::size_t n_items;
};

inline OneHotMF one_hot_mf(std::uint64_t seed, std::size_t n_users, std::size_t n_items,
                           std::size_t n_ratings, std::size_t true_rank, double noise_sd,
                           double test_fraction, bool with_biases = true, double factor_sd = 0.5) {
  Rng rng(seed);
  const std::size_t p = n_users + n_items;
  std::vector<double> U(n_users * true_rank), V(n_items * true_rank);
  for (double& u : U) u = factor_sd * rng.normal();
  for (double& v : V) v = factor_sd * rng.normal();
  std::vector<double> bu(n_users, 0.0), bi(n_items, 0.0);
  const double bias = with_biases ? 3.0 : 0.0;
  if (with_biases) {
    for (double& b : bu) b = 0.3 * rng.normal();
    for (double& b : bi) b = 0.3 * rng.normal();
  }
  // Distinct cells sampled without replacement.
  std::vector<std::uint64_t> cells(n_users * n_items);
  std::iota(cells.begin(), cells.end(), std::uint64_t{0});
  for (std::size_t t = 0; t < n_ratings; ++t)
    std::swap(cells[t], cells[t + rng.uniform_index(cells.size() - t)]);
  cells.resize(n_ratings);

  const std::size_t n_test = static_cast<std::size_t>(test_fraction * static_cast<double>(n_ratings));
  auto build = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> rows, cols;
    std::vector<double> vals, y;
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t u = cells[t] / n_items;
      const std::size_t i = cells[t] % n_items;
      const std::size_t row = t - begin;
      rows.insert(rows.end(), {row, row});
      cols.insert(cols.end(), {u, n_users + i});
      vals.insert(vals.end(), {1.0, 1.0});
      double r = bias + bu[u] + bi[i];
      for (std::size_t f = 0; f < true_rank; ++f) r += U[u * true_rank + f] * V[i * true_rank + f];
      y.push_back(r + noise_sd * rng.normal());
    }
    return LabeledData{SparseRowMatrix::from_triplets(end - begin, p, rows, cols, vals),
                       std::move(y)};
  };
  OneHotMF out;
  out.test = build(0, n_test);
  out.train = build(n_test, n_ratings);
  out.n_users = n_users;
  out.n_items = n_items;
  return out;
}

/// Ranking task: one one-hot row per item, random true utilities, and every
/// correctly ordered pair.
struct RankingTask {
  SparseRowMatrix X;
  RankingPairs pairs;
  std::vector<double> utility;
};

inline RankingTask ranking_task(std::uint64_t seed, std::size_t n_items) {
  Rng rng(seed);
  RankingTask task;
  task.utility.resize(n_items);
  for (double& u : task.utility) u = rng.normal();
  std::vector<std::size_t> rows(n_items), cols(n_items);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  std::vector<double> vals(n_items, 1.0);
  task.X = SparseRowMatrix::from_triplets(n_items, n_items, rows, cols, vals);
  for (std::size_t a = 0; a < n_items; ++a)
    for (std::size_t b = 0; b < n_items; ++b)
      if (a != b && task.utility[a] > task.utility[b]) task.pairs.push_back({a, b});
  return task;
}

inline double rmse(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace fastfm::testing
