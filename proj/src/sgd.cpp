// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fastfm/sgd.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <string_view>

#include "fastfm/error.hpp"
#include "fastfm/rng.hpp"
#include "fastfm/special.hpp"

namespace fastfm {

namespace {

// y_hat of one row; q[f] receives sum_i V(f, i) x_i.
double forward(const FMParams& params, const SparseVectorView& x, std::span<double> q) {
  double y = params.w0;
  for (std::size_t a = 0; a < x.nnz(); ++a) y += params.w[x.indices[a]] * x.values[a];
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
    q[f] = sum;
    pairwise += sum * sum - sum_sq;
  }
  return y + 0.5 * pairwise;
}

// grad += scale * d y_hat / d theta for one row, flat layout.
void add_row_gradient(const FMParams& params, const SparseVectorView& x,
                      std::span<const double> q, double scale, std::span<double> grad) {
  const std::size_t p = params.n_features();
  grad[0] += scale;
  for (std::size_t a = 0; a < x.nnz(); ++a) grad[1 + x.indices[a]] += scale * x.values[a];
  for (std::size_t f = 0; f < params.rank(); ++f) {
    const auto vf = params.factor(f);
    double* gf = grad.data() + 1 + p + f * p;
    for (std::size_t a = 0; a < x.nnz(); ++a) {
      const std::size_t i = x.indices[a];
      const double xi = x.values[a];
      gf[i] += scale * xi * (q[f] - vf[i] * xi);
    }
  }
}

void add_penalty_gradient(const FMParams& params, const SolverConfig& config,
                          std::span<double> grad) {
  const std::size_t p = params.n_features();
  grad[0] += config.l2_reg_w0 * params.w0;
  for (std::size_t i = 0; i < p; ++i) grad[1 + i] += config.l2_reg_w * params.w[i];
  for (std::size_t j = 0; j < params.V.size(); ++j)
    grad[1 + p + j] += config.l2_reg_V * params.V[j];
}

double log_loss(double y, double y_hat) { return -log_sigmoid(y * y_hat); }

void check_supervised(const LabeledData& data, const SolverConfig& config) {
  data.validate();
  if (config.task == Task::classification) data.validate_binary_labels();
  else if (config.task != Task::regression)
    throw ContractViolation("unknown task for a labeled loss; use the ranking overload");
}

FMParams starting_point(std::size_t n_cols, const SolverConfig& config,
                        const std::optional<FMParams>& warm) {
  if (!warm) return init_params(n_cols, config);
  check_warm_start(*warm, std::max(warm->n_features(), n_cols), config.rank);
  return *warm;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void validate_pairs(std::span<const RankingPair> pairs, std::size_t n_rows) {
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    const auto& pr = pairs[t];
    if (pr.winner >= n_rows || pr.loser >= n_rows)
      throw ContractViolation("pair " + std::to_string(t) + " references a row >= " +
                              std::to_string(n_rows));
    if (pr.winner == pr.loser)
      throw ContractViolation("pair " + std::to_string(t) + " pairs a row with itself");
  }
}

RankingPairs parse_pairs_csv(std::istream& in) {
  RankingPairs pairs;
  std::string text;
  std::size_t line = 0;
  auto to_index = [&](std::string_view tok, std::size_t& out) {
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
      tok.remove_suffix(1);
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size() && !tok.empty();
  };
  while (std::getline(in, text)) {
    ++line;
    std::string_view s(text);
    if (s.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto comma = s.find(',');
    RankingPair pr{};
    const bool ok = comma != std::string_view::npos && to_index(s.substr(0, comma), pr.winner) &&
                    to_index(s.substr(comma + 1), pr.loser);
    if (!ok) {
      // A first line that does not start like a number is a header.
      const char c = s[s.find_first_not_of(" \t")];
      if (line == 1 && !std::isdigit(static_cast<unsigned char>(c)) && c != '-' && c != '+')
        continue;
      throw ParseError("expected 'winner_row,loser_row', got '" + text + "'", line);
    }
    pairs.push_back(pr);
  }
  return pairs;
}

RankingPairs read_pairs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_pairs_csv(in);
}

std::vector<double> flatten(const FMParams& params) {
  std::vector<double> flat;
  flat.reserve(params.size());
  flat.push_back(params.w0);
  flat.insert(flat.end(), params.w.begin(), params.w.end());
  flat.insert(flat.end(), params.V.begin(), params.V.end());
  return flat;
}

FMParams unflatten(std::span<const double> flat, std::size_t n_features, std::size_t rank) {
  FMParams params(n_features, rank);
  if (flat.size() != params.size())
    throw ContractViolation("flat parameter vector has the wrong length");
  params.w0 = flat[0];
  std::copy_n(flat.begin() + 1, n_features, params.w.begin());
  std::copy(flat.begin() + 1 + static_cast<std::ptrdiff_t>(n_features), flat.end(),
            params.V.begin());
  return params;
}

double task_loss(const FMParams& params, const LabeledData& data, const SolverConfig& config) {
  check_supervised(data, config);
  const auto y_hat = predict(params, data.X);
  double loss = 0.0;
  for (std::size_t n = 0; n < y_hat.size(); ++n) {
    if (config.task == Task::regression) {
      const double e = y_hat[n] - data.y[n];
      loss += 0.5 * e * e;
    } else {
      loss += log_loss(data.y[n], y_hat[n]);
    }
  }
  return loss + l2_penalty(params, config);
}

double task_loss(const FMParams& params, const SparseRowMatrix& X, const RankingPairs& pairs,
                 const SolverConfig& config) {
  validate_pairs(pairs, X.n_rows());
  const auto y_hat = predict(params, X);
  double loss = 0.0;
  for (const auto& pr : pairs) loss -= log_sigmoid(y_hat[pr.winner] - y_hat[pr.loser]);
  return loss + l2_penalty(params, config);
}

std::vector<double> loss_gradient(const FMParams& params, const LabeledData& data,
                                  const SolverConfig& config) {
  check_supervised(data, config);
  std::vector<double> grad(params.size(), 0.0);
  std::vector<double> q(params.rank());
  for (std::size_t n = 0; n < data.X.n_rows(); ++n) {
    const auto x = data.X.row(n);
    const double y_hat = forward(params, x, q);
    const double g = config.task == Task::regression
                         ? y_hat - data.y[n]
                         : -data.y[n] * sigmoid(-data.y[n] * y_hat);
    add_row_gradient(params, x, q, g, grad);
  }
  add_penalty_gradient(params, config, grad);
  return grad;
}

std::vector<double> loss_gradient(const FMParams& params, const SparseRowMatrix& X,
                                  const RankingPairs& pairs, const SolverConfig& config) {
  validate_pairs(pairs, X.n_rows());
  std::vector<double> grad(params.size(), 0.0);
  std::vector<double> qa(params.rank());
  std::vector<double> qb(params.rank());
  for (const auto& pr : pairs) {
    const auto xa = X.row(pr.winner);
    const auto xb = X.row(pr.loser);
    const double delta = forward(params, xa, qa) - forward(params, xb, qb);
    const double m = sigmoid(-delta);
    add_row_gradient(params, xa, qa, -m, grad);
    add_row_gradient(params, xb, qb, m, grad);
  }
  add_penalty_gradient(params, config, grad);
  return grad;
}

double pairwise_accuracy(const FMParams& params, const SparseRowMatrix& X,
                         const RankingPairs& pairs) {
  validate_pairs(pairs, X.n_rows());
  if (pairs.empty()) return 0.0;
  const auto y_hat = predict(params, X);
  std::size_t correct = 0;
  for (const auto& pr : pairs) correct += y_hat[pr.winner] > y_hat[pr.loser] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

SgdFit sgd_fit(const LabeledData& data, const SolverConfig& config,
               const std::optional<FMParams>& warm, const SgdHooks& hooks) {
  config.validate();
  check_supervised(data, config);
  const auto start = std::chrono::steady_clock::now();
  FMParams params = starting_point(data.X.n_cols(), config, warm);
  const SparseRowMatrix X =
      data.X.n_cols() == params.n_features() ? data.X : with_n_cols(data.X, params.n_features());
  const LabeledData aligned{X, data.y};
  const std::size_t p = params.n_features();
  const std::size_t k = params.rank();
  const double eta = config.step_size;
  const bool regression = config.task == Task::regression;

  Rng rng(derive_seed(config.seed, 2));
  std::vector<std::size_t> order(X.n_rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> q(k);

  FitReport report;
  for (std::size_t epoch = 0; epoch < config.n_iter; ++epoch) {
    if (hooks.full_batch) {
      auto grad = loss_gradient(params, aligned, config);
      if (!config.fit_bias) grad[0] = 0.0;
      auto flat = flatten(params);
      for (std::size_t j = 0; j < flat.size(); ++j) flat[j] -= eta * grad[j];
      params = unflatten(flat, p, k);
    } else {
      for (std::size_t t = order.size(); t > 1; --t)
        std::swap(order[t - 1], order[rng.uniform_index(t)]);
      for (std::size_t n : order) {
        const auto x = X.row(n);
        const double y_hat = forward(params, x, q);
        const double y = data.y[n];
        const double g = regression ? y_hat - y : -y * sigmoid(-y * y_hat);
        if (config.fit_bias) params.w0 -= eta * (g + config.l2_reg_w0 * params.w0);
        for (std::size_t a = 0; a < x.nnz(); ++a) {
          const std::size_t i = x.indices[a];
          params.w[i] -= eta * (g * x.values[a] + config.l2_reg_w * params.w[i]);
        }
        for (std::size_t f = 0; f < k; ++f) {
          auto vf = params.factor(f);
          for (std::size_t a = 0; a < x.nnz(); ++a) {
            const std::size_t i = x.indices[a];
            const double xi = x.values[a];
            const double h = xi * (q[f] - vf[i] * xi);
            vf[i] -= eta * (g * h + config.l2_reg_V * vf[i]);
          }
        }
      }
    }
    const auto y_hat = predict(params, X);
    double loss = 0.0;
    for (std::size_t n = 0; n < y_hat.size(); ++n) {
      if (regression) {
        const double e = y_hat[n] - data.y[n];
        loss += e * e;
      } else {
        loss += log_loss(data.y[n], y_hat[n]);
      }
    }
    loss = y_hat.empty() ? 0.0 : loss / static_cast<double>(y_hat.size());
    if (!std::isfinite(loss))
      throw DivergenceError("SGD diverged in epoch " + std::to_string(epoch + 1) +
                            "; try a smaller step_size");
    report.objective_per_iter.push_back(loss);
    ++report.n_iter_done;
  }
  report.wall_time = seconds_since(start);
  return {std::move(params), std::move(report)};
}

SgdFit bpr_fit(const SparseRowMatrix& X_in, const RankingPairs& pairs, const SolverConfig& config,
               const std::optional<FMParams>& warm) {
  config.validate();
  if (pairs.empty()) throw ContractViolation("bpr_fit needs at least one pair");
  validate_pairs(pairs, X_in.n_rows());
  const auto start = std::chrono::steady_clock::now();
  FMParams params = starting_point(X_in.n_cols(), config, warm);
  const SparseRowMatrix X =
      X_in.n_cols() == params.n_features() ? X_in : with_n_cols(X_in, params.n_features());
  const std::size_t k = params.rank();
  const double eta = config.step_size;

  Rng rng(derive_seed(config.seed, 3));
  std::vector<double> qa(k);
  std::vector<double> qb(k);

  FitReport report;
  for (std::size_t epoch = 0; epoch < config.n_iter; ++epoch) {
    double sum_log_sig = 0.0;
    for (std::size_t step = 0; step < pairs.size(); ++step) {
      const RankingPair& pr = pairs[rng.uniform_index(pairs.size())];
      const auto xa = X.row(pr.winner);
      const auto xb = X.row(pr.loser);
      const double delta = forward(params, xa, qa) - forward(params, xb, qb);
      sum_log_sig += log_sigmoid(delta);
      const double m = sigmoid(-delta);

      // Merge the two sorted feature lists; absent entries have x = 0.
      std::size_t a = 0, b = 0;
      while (a < xa.nnz() || b < xb.nnz()) {
        std::size_t i;
        double x_a = 0.0, x_b = 0.0;
        if (b == xb.nnz() || (a < xa.nnz() && xa.indices[a] < xb.indices[b])) {
          i = xa.indices[a];
          x_a = xa.values[a++];
        } else if (a == xa.nnz() || xb.indices[b] < xa.indices[a]) {
          i = xb.indices[b];
          x_b = xb.values[b++];
        } else {
          i = xa.indices[a];
          x_a = xa.values[a++];
          x_b = xb.values[b++];
        }
        params.w[i] += eta * (m * (x_a - x_b) - config.l2_reg_w * params.w[i]);
        for (std::size_t f = 0; f < k; ++f) {
          double& v = params.v(f, i);
          const double h_a = x_a * (qa[f] - v * x_a);
          const double h_b = x_b * (qb[f] - v * x_b);
          v += eta * (m * (h_a - h_b) - config.l2_reg_V * v);
        }
      }
    }
    const double mean = sum_log_sig / static_cast<double>(pairs.size());
    if (!std::isfinite(mean))
      throw DivergenceError("BPR diverged in epoch " + std::to_string(epoch + 1) +
                            "; try a smaller step_size");
    report.objective_per_iter.push_back(mean);
    ++report.n_iter_done;
  }
  report.wall_time = seconds_since(start);
  return {std::move(params), std::move(report)};
}

}  // namespace fastfm
