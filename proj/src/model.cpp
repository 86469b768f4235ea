// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fastfm/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fastfm/error.hpp"
#include "fastfm/rng.hpp"
#include "fastfm/special.hpp"

namespace fastfm {

void FMParams::validate() const {
  if (V.size() != w.size() * rank_) throw ContractViolation("FMParams: V has the wrong size");
  if (!std::isfinite(w0)) throw ContractViolation("FMParams: non-finite w0");
  for (double x : w)
    if (!std::isfinite(x)) throw ContractViolation("FMParams: non-finite entry in w");
  for (double x : V)
    if (!std::isfinite(x)) throw ContractViolation("FMParams: non-finite entry in V");
}

void SolverConfig::validate() const {
  if (!(l2_reg_w >= 0.0) || !(l2_reg_V >= 0.0) || !(l2_reg_w0 >= 0.0))
    throw ContractViolation("regularization must be >= 0");
  if (!(init_std >= 0.0)) throw ContractViolation("init_std must be >= 0");
  if (!(step_size > 0.0)) throw ContractViolation("step_size must be > 0");
}

void FitReport::append(const FitReport& more) {
  objective_per_iter.insert(objective_per_iter.end(), more.objective_per_iter.begin(),
                            more.objective_per_iter.end());
  n_iter_done += more.n_iter_done;
  wall_time += more.wall_time;
}

FMParams init_params(std::size_t n_features, const SolverConfig& config) {
  config.validate();
  FMParams params(n_features, config.rank);
  Rng rng(config.seed);
  for (double& v : params.V) v = config.init_std * rng.normal();
  return params;
}

namespace {
void check_row(const FMParams& params, const SparseVectorView& x) {
  if (!x.empty() && x.indices.back() >= params.n_features())
    throw ContractViolation("feature index " + std::to_string(x.indices.back()) +
                            " >= model feature count " + std::to_string(params.n_features()));
}

void check_matrix(const FMParams& params, const SparseRowMatrix& X) {
  if (X.n_cols() > params.n_features())
    throw ContractViolation("design matrix has " + std::to_string(X.n_cols()) +
                            " columns but the model has " +
                            std::to_string(params.n_features()) + " features");
}
}  // namespace

double predict_naive(const FMParams& params, const SparseVectorView& x) {
  check_row(params, x);
  const std::size_t k = params.rank();
  double y = params.w0;
  for (std::size_t a = 0; a < x.nnz(); ++a) y += params.w[x.indices[a]] * x.values[a];
  for (std::size_t a = 0; a < x.nnz(); ++a) {
    for (std::size_t b = a + 1; b < x.nnz(); ++b) {
      double dot = 0.0;
      for (std::size_t f = 0; f < k; ++f)
        dot += params.v(f, x.indices[a]) * params.v(f, x.indices[b]);
      y += dot * x.values[a] * x.values[b];
    }
  }
  return y;
}

double predict_row(const FMParams& params, const SparseVectorView& x) {
  double linear = params.w0;
  for (std::size_t a = 0; a < x.nnz(); ++a) linear += params.w[x.indices[a]] * x.values[a];
  double pairwise = 0.0;
  for (std::size_t f = 0; f < params.rank(); ++f) {
    const auto vf = params.factor(f);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t a = 0; a < x.nnz(); ++a) {
      const double t = vf[x.indices[a]] * x.values[a];
      sum += t;
      sum_sq += t * t;
    }
    pairwise += sum * sum - sum_sq;
  }
  return linear + 0.5 * pairwise;
}

std::vector<double> predict(const FMParams& params, const SparseRowMatrix& X, int n_threads) {
  check_matrix(params, X);
  std::vector<double> out(X.n_rows());
  const auto n = static_cast<std::ptrdiff_t>(X.n_rows());
#pragma omp parallel for schedule(static) num_threads(std::max(n_threads, 1)) if (n_threads > 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = predict_row(params, X.row(i));
  return out;
}

std::vector<double> predict_serial(const FMParams& params, const SparseRowMatrix& X) {
  check_matrix(params, X);
  std::vector<double> out(X.n_rows());
  for (std::size_t i = 0; i < X.n_rows(); ++i) out[i] = predict_row(params, X.row(i));
  return out;
}

std::vector<double> probit_proba(std::span<const double> y_hat) {
  std::vector<double> out(y_hat.size());
  std::transform(y_hat.begin(), y_hat.end(), out.begin(), normal_cdf);
  return out;
}

std::vector<double> sigmoid_proba(std::span<const double> y_hat) {
  std::vector<double> out(y_hat.size());
  std::transform(y_hat.begin(), y_hat.end(), out.begin(), sigmoid);
  return out;
}

SampleCaches build_caches(const FMParams& params, const SparseRowMatrix& X, int n_threads) {
  check_matrix(params, X);
  const std::size_t n = X.n_rows();
  const std::size_t k = params.rank();
  SampleCaches caches;
  caches.y_hat.resize(n);
  caches.q.assign(k * n, 0.0);
  const auto n_signed = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) num_threads(std::max(n_threads, 1)) if (n_threads > 1)
  for (std::ptrdiff_t row = 0; row < n_signed; ++row) {
    const auto x = X.row(row);
    double y = params.w0;
    for (std::size_t a = 0; a < x.nnz(); ++a) y += params.w[x.indices[a]] * x.values[a];
    double pairwise = 0.0;
    for (std::size_t f = 0; f < k; ++f) {
      const auto vf = params.factor(f);
      double sum = 0.0;
      double sum_sq = 0.0;
      for (std::size_t a = 0; a < x.nnz(); ++a) {
        const double t = vf[x.indices[a]] * x.values[a];
        sum += t;
        sum_sq += t * t;
      }
      caches.q[f * n + row] = sum;
      pairwise += sum * sum - sum_sq;
    }
    caches.y_hat[row] = y + 0.5 * pairwise;
  }
  return caches;
}

double cache_deviation(const SampleCaches& caches, const FMParams& params,
                       const SparseRowMatrix& X) {
  const SampleCaches fresh = build_caches(params, X);
  if (fresh.y_hat.size() != caches.y_hat.size() || fresh.q.size() != caches.q.size())
    return INFINITY;
  double worst = 0.0;
  auto compare = [&](const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1.0});
      const double dev = std::abs(a[i] - b[i]) / scale;
      if (!(dev <= worst)) worst = std::isnan(dev) ? INFINITY : dev;
    }
  };
  compare(caches.y_hat, fresh.y_hat);
  compare(caches.q, fresh.q);
  return worst;
}

double l2_penalty(const FMParams& params, const SolverConfig& config) {
  double w_sq = 0.0;
  for (double x : params.w) w_sq += x * x;
  double v_sq = 0.0;
  for (double x : params.V) v_sq += x * x;
  return 0.5 * (config.l2_reg_w0 * params.w0 * params.w0 + config.l2_reg_w * w_sq +
                config.l2_reg_V * v_sq);
}

void check_warm_start(const FMParams& warm, std::size_t n_features, std::size_t rank) {
  if (warm.n_features() != n_features || warm.rank() != rank)
    throw ContractViolation("warm start has shape (p=" + std::to_string(warm.n_features()) +
                            ", k=" + std::to_string(warm.rank()) + "), expected (p=" +
                            std::to_string(n_features) + ", k=" + std::to_string(rank) + ")");
  warm.validate();
}

}  // namespace fastfm
