// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fastfm/mcmc.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <ostream>

#include "fastfm/error.hpp"
#include "fastfm/libsvm.hpp"
#include "fastfm/special.hpp"
#include "sweep.hpp"

namespace fastfm {

namespace {

using detail::Block;
using detail::Coordinate;

constexpr std::size_t kBiasGroup = 0;
constexpr std::size_t kLinearGroup = 1;
constexpr std::size_t kFirstFactorGroup = 2;

std::size_t group_of(const Coordinate& c) {
  switch (c.block) {
    case Block::bias: return kBiasGroup;
    case Block::linear: return kLinearGroup;
    case Block::factor: return kFirstFactorGroup + c.factor;
  }
  return kBiasGroup;
}

[[noreturn]] void diverged(const McmcState& s, const char* what) {
  throw DivergenceError(std::string("MCMC diverged: non-finite ") + what + " at iteration " +
                        std::to_string(s.n_iter_done + 1));
}

void sample_group(McmcState& s, HyperGroup& g, std::span<const double> members) {
  const HyperPrior& pr = s.prior;
  const double size = static_cast<double>(members.size());
  double sq = 0.0;
  double sum = 0.0;
  for (double theta : members) {
    const double d = theta - g.mu;
    sq += d * d;
    sum += theta;
  }
  const double dm = g.mu - pr.mu0;
  // lambda | mu, theta: the mu prior N(mu0, 1/(gamma0 lambda)) contributes one
  // more degree of freedom and its own squared deviation.
  const double shape = pr.alpha_lambda + 0.5 * (size + 1.0);
  const double rate = pr.beta_lambda + 0.5 * (sq + pr.gamma0 * dm * dm);
  g.lambda = s.rng.gamma(shape, rate);
  if (!(g.lambda > 0.0) || !std::isfinite(g.lambda)) diverged(s, "group precision");
  const double prec = (size + pr.gamma0) * g.lambda;
  const double mean = (sum + pr.gamma0 * pr.mu0) / (size + pr.gamma0);
  g.mu = mean + s.rng.normal() / std::sqrt(prec);
  if (!std::isfinite(g.mu)) diverged(s, "group mean");
}

void sample_hyper(McmcState& s, std::span<const double> target) {
  if (s.task == Task::regression) {
    double sq = 0.0;
    for (std::size_t n = 0; n < target.size(); ++n) {
      const double e = s.caches.y_hat[n] - target[n];
      sq += e * e;
    }
    s.alpha = s.rng.gamma(s.prior.alpha0 + 0.5 * static_cast<double>(target.size()),
                          s.prior.beta0 + 0.5 * sq);
    if (!(s.alpha > 0.0) || !std::isfinite(s.alpha)) diverged(s, "noise precision");
  }
  if (s.fit_bias) sample_group(s, s.groups[kBiasGroup], std::span(&s.params.w0, 1));
  sample_group(s, s.groups[kLinearGroup], s.params.w);
  for (std::size_t f = 0; f < s.params.rank(); ++f)
    sample_group(s, s.groups[kFirstFactorGroup + f], s.params.factor(f));
}

void sample_parameters(McmcState& s, const SparseColMatrix& Xc, std::span<const double> target) {
  const double alpha = s.alpha;
  const double scale = s.hooks.theta_variance_scale;
  detail::coordinate_sweep(
      s.params, s.caches, Xc, target, s.fit_bias,
      [&](const Coordinate& c, double theta, double sum_h2, double sum_he) {
        const HyperGroup& g = s.groups[group_of(c)];
        const double var = 1.0 / (alpha * sum_h2 + g.lambda);
        const double mean = var * (alpha * (theta * sum_h2 - sum_he) + g.lambda * g.mu);
        const double draw = mean + std::sqrt(var * scale) * s.rng.normal();
        if (!std::isfinite(draw)) diverged(s, "parameter draw");
        return draw;
      });
}

void sample_latent(McmcState& s, std::span<const double> labels) {
  for (std::size_t n = 0; n < labels.size(); ++n)
    s.latent[n] = sample_truncated_normal(s.rng, s.caches.y_hat[n], labels[n]);
}

void record_traces(McmcState& s) {
  McmcTraces& t = s.traces;
  t.alpha.push_back(s.alpha);
  for (std::size_t g = 0; g < s.groups.size(); ++g) {
    t.lambda[g].push_back(s.groups[g].lambda);
    t.mu[g].push_back(s.groups[g].mu);
  }
  t.sigma_w.push_back(1.0 / std::sqrt(s.groups[kLinearGroup].lambda));
}

double training_loss(const McmcState& s, std::span<const double> y) {
  double acc = 0.0;
  if (s.task == Task::classification) {
    for (std::size_t n = 0; n < y.size(); ++n) acc -= normal_log_cdf(y[n] * s.caches.y_hat[n]);
    return y.empty() ? 0.0 : acc / static_cast<double>(y.size());
  }
  for (std::size_t n = 0; n < y.size(); ++n) {
    const double e = s.caches.y_hat[n] - y[n];
    acc += e * e;
  }
  return y.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(y.size()));
}

std::vector<double> current_output(const McmcState& s, const SparseRowMatrix& X_test) {
  std::vector<double> out;
  if (s.n_samples_accumulated > 0) {
    out.resize(s.pred_sum.size());
    const double inv = 1.0 / static_cast<double>(s.n_samples_accumulated);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.pred_sum[i] * inv;
    return out;
  }
  out = predict(s.params, X_test);
  if (s.task == Task::classification) out = probit_proba(out);
  return out;
}

void check_inputs(const LabeledData& train, const SparseRowMatrix& X_test, Task task) {
  train.validate();
  if (task == Task::classification) train.validate_binary_labels();
  if (X_test.n_cols() > train.X.n_cols())
    throw ContractViolation("test matrix has " + std::to_string(X_test.n_cols()) +
                            " columns, training data has " + std::to_string(train.X.n_cols()));
}

McmcState initialize_impl(const LabeledData& train, const SparseRowMatrix& X_test,
                          const SolverConfig& config, Task task,
                          const std::optional<FMParams>& warm, const McmcHooks& hooks) {
  config.validate();
  check_inputs(train, X_test, task);
  if (!(hooks.initial_alpha > 0.0) || !(hooks.initial_lambda > 0.0) ||
      !(hooks.theta_variance_scale > 0.0))
    throw ContractViolation("MCMC hooks: initial precisions and variance scale must be > 0");

  McmcState s;
  s.task = task;
  s.fit_bias = config.fit_bias;
  s.hooks = hooks;
  if (warm) {
    check_warm_start(*warm, std::max(warm->n_features(), train.X.n_cols()), config.rank);
    s.params = *warm;
  } else {
    s.params = init_params(train.X.n_cols(), config);
  }
  s.caches = build_caches(s.params, train.X);
  s.alpha = task == Task::regression ? hooks.initial_alpha : 1.0;
  s.groups.push_back({"w0", hooks.initial_lambda, 0.0});
  s.groups.push_back({"w", hooks.initial_lambda, 0.0});
  for (std::size_t f = 0; f < s.params.rank(); ++f)
    s.groups.push_back({"v_" + std::to_string(f), hooks.initial_lambda, 0.0});
  s.rng.reseed(derive_seed(config.seed, 1));
  s.pred_sum.assign(X_test.n_rows(), 0.0);
  s.n_train_rows = train.X.n_rows();
  s.test_fingerprint = matrix_fingerprint(X_test);
  s.traces.group_names.clear();
  for (const auto& g : s.groups) s.traces.group_names.push_back(g.name);
  s.traces.lambda.assign(s.groups.size(), {});
  s.traces.mu.assign(s.groups.size(), {});
  if (task == Task::classification) {
    s.latent.resize(train.y.size());
    sample_latent(s, train.y);
  }
  return s;
}

McmcResult run_chain(const LabeledData& train, const SparseRowMatrix& X_test,
                     const SolverConfig& config, Task task, std::optional<McmcState> state,
                     const McmcObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  if (!state) {
    state = initialize_impl(train, X_test, config, task, std::nullopt, {});
  } else {
    check_inputs(train, X_test, task);
    if (state->task != task) throw ContractViolation("MCMC state was created for another task");
    if (state->n_train_rows != train.X.n_rows() ||
        train.X.n_cols() > state->params.n_features())
      throw ContractViolation("MCMC state does not match the training data dimensions");
    if (state->test_fingerprint != matrix_fingerprint(X_test))
      throw ContractViolation("MCMC state was created with a different test matrix");
  }
  McmcState& s = *state;
  const std::size_t p = s.params.n_features();
  const SparseColMatrix Xc =
      to_column_major(train.X.n_cols() == p ? train.X : with_n_cols(train.X, p));
  const bool probit = task == Task::classification;
  const std::span<const double> target = probit ? std::span<const double>(s.latent) : train.y;

  FitReport report;
  for (std::size_t it = 0; it < config.n_iter; ++it) {
    if (s.hooks.sample_hyper) sample_hyper(s, target);
    sample_parameters(s, Xc, target);
    if (probit) sample_latent(s, train.y);

    const std::vector<double> test_pred = predict(s.params, X_test);
    for (std::size_t i = 0; i < test_pred.size(); ++i)
      s.pred_sum[i] += probit ? normal_cdf(test_pred[i]) : test_pred[i];
    ++s.n_samples_accumulated;
    record_traces(s);
    ++s.n_iter_done;
    report.objective_per_iter.push_back(training_loss(s, train.y));
    ++report.n_iter_done;
    if (observer) observer(s);
  }

  std::vector<double> y_pred = current_output(s, X_test);
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(y_pred), std::move(*state), std::move(report)};
}

}  // namespace

McmcState mcmc_initialize(const LabeledData& train, const SparseRowMatrix& X_test,
                          const SolverConfig& config, const std::optional<FMParams>& warm,
                          const McmcHooks& hooks) {
  const Task task = config.task == Task::classification ? Task::classification : Task::regression;
  return initialize_impl(train, X_test, config, task, warm, hooks);
}

McmcResult mcmc_fit_predict(const LabeledData& train, const SparseRowMatrix& X_test,
                            const SolverConfig& config, std::optional<McmcState> state,
                            const McmcObserver& observer) {
  return run_chain(train, X_test, config, Task::regression, std::move(state), observer);
}

McmcResult mcmc_fit_predict_classification(const LabeledData& train,
                                           const SparseRowMatrix& X_test,
                                           const SolverConfig& config,
                                           std::optional<McmcState> state,
                                           const McmcObserver& observer) {
  return run_chain(train, X_test, config, Task::classification, std::move(state), observer);
}

void reset_accumulator(McmcState& state) {
  std::fill(state.pred_sum.begin(), state.pred_sum.end(), 0.0);
  state.n_samples_accumulated = 0;
}

McmcTraces get_traces(const McmcState& state) { return state.traces; }

std::vector<double> hyper_param_vector(const McmcState& state) {
  std::vector<double> out{state.alpha, state.groups[kLinearGroup].lambda,
                          state.groups[kLinearGroup].mu};
  for (std::size_t f = 0; f < state.params.rank(); ++f)
    out.push_back(state.groups[kFirstFactorGroup + f].lambda);
  for (std::size_t f = 0; f < state.params.rank(); ++f)
    out.push_back(state.groups[kFirstFactorGroup + f].mu);
  return out;
}

void write_trace_csv(std::ostream& out, const McmcTraces& traces) {
  const std::size_t n_groups = traces.lambda.size();
  const std::size_t k = n_groups >= kFirstFactorGroup ? n_groups - kFirstFactorGroup : 0;
  out << "iter,alpha,lambda_w,mu_w";
  for (std::size_t f = 0; f < k; ++f) out << ",lambda_v_" << f;
  for (std::size_t f = 0; f < k; ++f) out << ",mu_v_" << f;
  out << ",sigma_w\n";
  for (std::size_t it = 0; it < traces.alpha.size(); ++it) {
    out << it + 1 << ',' << format_double(traces.alpha[it]) << ','
        << format_double(traces.lambda[kLinearGroup][it]) << ','
        << format_double(traces.mu[kLinearGroup][it]);
    for (std::size_t f = 0; f < k; ++f)
      out << ',' << format_double(traces.lambda[kFirstFactorGroup + f][it]);
    for (std::size_t f = 0; f < k; ++f)
      out << ',' << format_double(traces.mu[kFirstFactorGroup + f][it]);
    out << ',' << format_double(traces.sigma_w[it]) << '\n';
  }
}

std::uint64_t matrix_fingerprint(const SparseRowMatrix& X) {
  // FNV-1a over dimensions, structure and value bits.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  mix(X.n_rows());
  mix(X.n_cols());
  for (std::size_t o : X.row_offsets()) mix(o);
  for (std::size_t c : X.col_indices()) mix(c);
  for (double v : X.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    mix(bits);
  }
  return h;
}

}  // namespace fastfm
