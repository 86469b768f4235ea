// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fastfm/diagnostics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <ostream>
#include <vector>

#include "fastfm/error.hpp"
#include "fastfm/libsvm.hpp"
#include "fastfm/rng.hpp"

namespace fastfm {

FdCheckResult finite_difference_check(const LossFn& loss, std::span<const double> theta,
                                      std::span<const double> analytic, double epsilon) {
  if (!(epsilon > 0.0)) throw ContractViolation("finite_difference_check: epsilon must be > 0");
  if (analytic.size() != theta.size())
    throw ContractViolation("finite_difference_check: gradient length mismatch");
  std::vector<double> point(theta.begin(), theta.end());
  FdCheckResult result;
  for (std::size_t j = 0; j < point.size(); ++j) {
    const double saved = point[j];
    point[j] = saved + epsilon;
    const double plus = loss(point);
    point[j] = saved - epsilon;
    const double minus = loss(point);
    point[j] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus))
      throw DivergenceError("finite_difference_check: non-finite loss at coordinate " +
                            std::to_string(j));
    const double numeric = (plus - minus) / (2.0 * epsilon);
    const double scale = std::max({std::abs(analytic[j]), std::abs(numeric), 1e-12});
    const double rel = std::abs(analytic[j] - numeric) / scale;
    if (rel > result.max_relative_error || std::isnan(rel)) {
      result.max_relative_error = rel;
      result.worst_index = j;
    }
    // Rounding in each loss evaluation is about DBL_EPSILON * |L|.
    const double noise = DBL_EPSILON * std::max(std::abs(plus), std::abs(minus)) / epsilon;
    if (noise > 1e-4 * scale) result.reliable = false;
  }
  return result;
}

FdCheckResult check_loss_gradient(const FMParams& params, const LabeledData& data,
                                  const SolverConfig& config, double epsilon) {
  const auto grad = loss_gradient(params, data, config);
  const std::size_t p = params.n_features();
  const std::size_t k = params.rank();
  return finite_difference_check(
      [&](std::span<const double> flat) { return task_loss(unflatten(flat, p, k), data, config); },
      flatten(params), grad, epsilon);
}

FdCheckResult check_loss_gradient(const FMParams& params, const SparseRowMatrix& X,
                                  const RankingPairs& pairs, const SolverConfig& config,
                                  double epsilon) {
  const auto grad = loss_gradient(params, X, pairs, config);
  const std::size_t p = params.n_features();
  const std::size_t k = params.rank();
  return finite_difference_check(
      [&](std::span<const double> flat) {
        return task_loss(unflatten(flat, p, k), X, pairs, config);
      },
      flatten(params), grad, epsilon);
}

KsResult ks_test_uniform(std::span<const double> samples) {
  if (samples.empty()) throw ContractViolation("ks_test_uniform: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double u = std::clamp(sorted[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - u, u - static_cast<double>(i) / n});
  }
  const double sqrt_n = std::sqrt(n);
  const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
  // Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)
  double p = 0.0;
  if (lambda < 0.2) {
    p = 1.0;
  } else {
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
      const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
      p += term;
      if (std::abs(term) < 1e-16) break;
      sign = -sign;
    }
    p = std::clamp(2.0 * p, 0.0, 1.0);
  }
  return {d, p};
}

double posterior_quantile(std::span<const double> draws, double truth) {
  if (draws.empty()) throw ContractViolation("posterior_quantile: no draws");
  double below = 0.0;
  for (double d : draws) {
    if (d < truth) below += 1.0;
    else if (d == truth) below += 0.5;
  }
  return below / static_cast<double>(draws.size());
}

namespace {

struct ReplicationOutcome {
  std::vector<double> quantiles;
  bool failed = false;
};

// Scalars checked by the harness, evaluated for one parameter set.
void checked_scalars(const FMParams& params, double alpha, std::vector<double>& out) {
  out.clear();
  out.push_back(params.w0);
  out.insert(out.end(), params.w.begin(), params.w.end());
  const std::size_t p = params.n_features();
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      double dot = 0.0;
      for (std::size_t f = 0; f < params.rank(); ++f) dot += params.v(f, i) * params.v(f, j);
      out.push_back(dot);
    }
  }
  out.push_back(alpha);
}

ReplicationOutcome run_replication(const PosteriorQuantileConfig& cfg, std::size_t r) {
  Rng rng(derive_seed(cfg.seed, r));
  const HyperPrior prior;
  const std::size_t p = cfg.n_features;
  const std::size_t k = cfg.rank;

  auto draw_block = [&](std::span<double> block) {
    const double lambda = rng.gamma(prior.alpha_lambda, prior.beta_lambda);
    const double mu = prior.mu0 + rng.normal() / std::sqrt(prior.gamma0 * lambda);
    for (double& t : block) t = mu + rng.normal() / std::sqrt(lambda);
  };
  const double alpha = rng.gamma(prior.alpha0, prior.beta0);
  FMParams truth(p, k);
  draw_block(std::span(&truth.w0, 1));
  draw_block(truth.w);
  for (std::size_t f = 0; f < k; ++f) draw_block(truth.factor(f));

  std::vector<std::size_t> rows, cols;
  std::vector<double> vals;
  for (std::size_t n = 0; n < cfg.n_samples; ++n) {
    for (std::size_t i = 0; i < p; ++i) {
      if (rng.uniform() < cfg.density) {
        rows.push_back(n);
        cols.push_back(i);
        vals.push_back(rng.normal());
      }
    }
  }
  LabeledData data{SparseRowMatrix::from_triplets(cfg.n_samples, p, rows, cols, vals), {}};
  data.y = predict(truth, data.X);
  for (double& y : data.y) y += rng.normal() / std::sqrt(alpha);

  std::vector<double> true_values;
  checked_scalars(truth, alpha, true_values);
  std::vector<std::vector<double>> draws(true_values.size());
  std::vector<double> scratch;

  SolverConfig sc;
  sc.rank = k;
  sc.n_iter = cfg.n_gibbs_iter;
  sc.init_std = 0.1;
  sc.seed = derive_seed(cfg.seed ^ 0x5eedULL, r);

  ReplicationOutcome out;
  try {
    McmcState state = mcmc_initialize(data, data.X, sc, std::nullopt, cfg.hooks);
    mcmc_fit_predict(data, data.X, sc, std::move(state), [&](const McmcState& s) {
      if (s.n_iter_done <= cfg.burn_in) return;
      checked_scalars(s.params, s.alpha, scratch);
      for (std::size_t j = 0; j < scratch.size(); ++j) draws[j].push_back(scratch[j]);
    });
  } catch (const DivergenceError&) {
    out.failed = true;
    return out;
  }
  for (std::size_t j = 0; j < true_values.size(); ++j)
    out.quantiles.push_back(posterior_quantile(draws[j], true_values[j]));
  return out;
}

}  // namespace

PosteriorQuantileReport posterior_quantile_run(const PosteriorQuantileConfig& cfg) {
  if (cfg.n_replications == 0) throw ContractViolation("posterior_quantile_run: no replications");
  if (cfg.n_gibbs_iter <= cfg.burn_in)
    throw ContractViolation("posterior_quantile_run: n_gibbs_iter must exceed burn_in");

  std::vector<ReplicationOutcome> outcomes(cfg.n_replications);
  const auto n = static_cast<std::ptrdiff_t>(cfg.n_replications);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(cfg.n_threads, 1)) if (cfg.n_threads > 1)
  for (std::ptrdiff_t r = 0; r < n; ++r)
    outcomes[r] = run_replication(cfg, static_cast<std::size_t>(r));

  PosteriorQuantileReport report;
  report.n_replications = cfg.n_replications;
  report.quantity_names.push_back("w0");
  for (std::size_t i = 0; i < cfg.n_features; ++i)
    report.quantity_names.push_back("w_" + std::to_string(i));
  for (std::size_t i = 0; i < cfg.n_features; ++i)
    for (std::size_t j = i + 1; j < cfg.n_features; ++j)
      report.quantity_names.push_back("vv_" + std::to_string(i) + "_" + std::to_string(j));
  report.quantity_names.push_back("alpha");

  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    if (outcomes[r].failed) {
      ++report.n_failed;
      continue;
    }
    report.replications.push_back(r);
    report.quantiles.insert(report.quantiles.end(), outcomes[r].quantiles.begin(),
                            outcomes[r].quantiles.end());
  }
  if (static_cast<double>(report.n_failed) > 0.05 * static_cast<double>(cfg.n_replications))
    throw DivergenceError("posterior_quantile_run: " + std::to_string(report.n_failed) + " of " +
                          std::to_string(cfg.n_replications) + " replications diverged");
  report.ks = ks_test_uniform(report.quantiles);
  return report;
}

void write_quantiles_csv(std::ostream& out, const PosteriorQuantileReport& report) {
  out << "replication,quantity,quantile\n";
  const std::size_t per = report.quantity_names.size();
  for (std::size_t t = 0; t < report.quantiles.size(); ++t)
    out << report.replications[t / per] << ',' << report.quantity_names[t % per] << ','
        << format_double(report.quantiles[t]) << '\n';
}

}  // namespace fastfm
