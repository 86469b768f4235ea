// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>

#include "fastfm/als.hpp"
#include "fastfm/error.hpp"
#include "fastfm/libsvm.hpp"
#include "fastfm/mcmc.hpp"
#include "fastfm/model_io.hpp"
#include "fastfm/sgd.hpp"
#include "fastfm/special.hpp"

namespace fastfm::cli {

namespace {

// Raised for flag combinations CLI11 cannot express.
struct FlagError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitArgs {
  std::string task;
  std::string solver;
  std::string train;
  std::string test;
  std::string pairs;
  std::size_t rank = 8;
  std::size_t n_iter = 100;
  double init_std = 0.1;
  std::optional<double> l2_reg;
  std::optional<double> l2_reg_w;
  std::optional<double> l2_reg_V;
  double l2_reg_w0 = 0.0;
  double step_size = 0.01;
  std::uint64_t seed = 123;
  std::string model_out;
  std::string pred_out;
  std::string trace_out;
  std::string warm_start;
  std::optional<std::size_t> n_features;
  bool one_based = false;
  bool no_bias = false;
  bool clip_features = false;
};

struct PredictArgs {
  std::string model;
  std::string data;
  std::string pred_out;
  bool proba = false;
  bool clip_features = false;
  bool one_based = false;
};

struct BenchArgs {
  std::string train;
  std::string test;
  std::string solver;
  std::vector<std::size_t> ranks{8, 16, 32, 64};
  std::size_t n_iter = 200;
  std::size_t repeats = 3;
  std::string out;
  double init_std = 0.1;
  double l2_reg = 0.0;
  std::uint64_t seed = 123;
  bool one_based = false;
};

template <class Fn>
void write_file(const std::string& path, Fn&& body) {
  std::ofstream f(path);
  if (!f) throw std::ios_base::failure("cannot write '" + path + "'");
  body(f);
  if (!f) throw std::ios_base::failure("write failed for '" + path + "'");
}

void write_predictions(const std::string& path, const std::vector<double>& values) {
  write_file(path, [&](std::ostream& f) {
    for (double v : values) f << format_double(v) << '\n';
  });
}

// Aligns `X` to `n_features` columns. Wider data is an error unless clipping.
SparseRowMatrix align_columns(const SparseRowMatrix& X, std::size_t n_features, bool clip,
                              const std::string& what) {
  if (X.n_cols() > n_features && !clip)
    throw ParseError(what + " has feature index " + std::to_string(X.n_cols() - 1) +
                         " but the model has " + std::to_string(n_features) +
                         " features (use --clip-features to drop them)",
                     0, ParseError::Kind::structure);
  return X.n_cols() == n_features ? X : with_n_cols(X, n_features);
}

double rmse(const std::vector<double>& pred, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += (pred[i] - y[i]) * (pred[i] - y[i]);
  return y.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(y.size()));
}

// Mean negative log-likelihood of labels in {-1, +1} under probabilities of +1.
double logloss(const std::vector<double>& proba, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = std::clamp(proba[i], 1e-300, 1.0 - 1e-16);
    acc -= y[i] > 0 ? std::log(p) : std::log1p(-p);
  }
  return y.empty() ? 0.0 : acc / static_cast<double>(y.size());
}

Task parse_task(const std::string& t) {
  if (t == "r") return Task::regression;
  if (t == "c") return Task::classification;
  return Task::ranking;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const Task task = parse_task(a.task);
  if (a.solver == "mcmc" && a.test.empty())
    throw FlagError("--test is required with --solver mcmc");
  if (task == Task::ranking && a.solver != "sgd")
    throw FlagError("--task rank requires --solver sgd");
  if (task == Task::ranking && a.pairs.empty())
    throw FlagError("--pairs is required with --task rank");
  if (!a.trace_out.empty() && a.solver != "mcmc")
    throw FlagError("--trace-out is only available with --solver mcmc");
  if (!a.model_out.empty() && a.solver == "mcmc")
    throw FlagError("--model-out is not available with --solver mcmc");

  SolverConfig config;
  config.task = task;
  config.rank = a.rank;
  config.n_iter = a.n_iter;
  config.init_std = a.init_std;
  if (a.l2_reg) config.set_l2_reg(*a.l2_reg);
  if (a.l2_reg_w) config.l2_reg_w = *a.l2_reg_w;
  if (a.l2_reg_V) config.l2_reg_V = *a.l2_reg_V;
  config.l2_reg_w0 = a.l2_reg_w0;
  config.step_size = a.step_size;
  config.seed = a.seed;
  config.fit_bias = !a.no_bias;
  try {
    config.validate();
  } catch (const ContractViolation& e) {
    throw FlagError(e.what());
  }

  LibsvmOptions opts;
  opts.one_based = a.one_based;
  opts.n_cols = a.n_features;
  LabeledData train = read_libsvm_file(a.train, opts);

  std::optional<FMParams> warm;
  if (!a.warm_start.empty()) {
    warm = load_model_file(a.warm_start);
    if (warm->rank() != config.rank)
      throw FlagError("--rank " + std::to_string(config.rank) +
                      " does not match the warm-start model rank " +
                      std::to_string(warm->rank()));
  }
  const std::size_t n_features =
      warm ? std::max(warm->n_features(), train.X.n_cols()) : train.X.n_cols();
  if (warm && train.X.n_cols() > warm->n_features())
    throw ParseError("training data has more features than the warm-start model", 0,
                     ParseError::Kind::structure);
  train.X = align_columns(train.X, n_features, false, "training data");

  std::optional<LabeledData> test;
  if (!a.test.empty()) {
    LibsvmOptions topts;
    topts.one_based = a.one_based;
    test = read_libsvm_file(a.test, topts);
    test->X = align_columns(test->X, n_features, a.clip_features, "test data");
  }

  nlohmann::ordered_json summary;
  summary["task"] = a.task;
  summary["solver"] = a.solver;
  summary["n_iter"] = config.n_iter;

  std::vector<double> predictions;
  FitReport report;
  if (a.solver == "mcmc") {
    McmcState state = mcmc_initialize(train, test->X, config, warm);
    McmcResult result = task == Task::classification
                            ? mcmc_fit_predict_classification(train, test->X, config, std::move(state))
                            : mcmc_fit_predict(train, test->X, config, std::move(state));
    report = result.report;
    predictions = std::move(result.y_pred);
    const std::vector<double> train_hat = result.state.caches.y_hat;
    if (task == Task::classification)
      summary["train_logloss"] = logloss(probit_proba(train_hat), train.y);
    else
      summary["train_rmse"] = rmse(train_hat, train.y);
    if (!a.trace_out.empty())
      write_file(a.trace_out,
                 [&](std::ostream& f) { write_trace_csv(f, get_traces(result.state)); });
  } else {
    FMParams params;
    if (task == Task::ranking) {
      const RankingPairs pairs = read_pairs_file(a.pairs);
      validate_pairs(pairs, train.X.n_rows());
      SgdFit fit = bpr_fit(train.X, pairs, config, warm);
      params = std::move(fit.params);
      report = fit.report;
      summary["mean_lnsig"] = report.objective_per_iter.empty()
                                  ? 0.0
                                  : report.objective_per_iter.back();
    } else if (a.solver == "als") {
      AlsFit fit = task == Task::classification ? als_fit_classification(train, config, warm)
                                                : als_fit(train, config, warm);
      params = std::move(fit.params);
      report = fit.report;
    } else {
      SgdFit fit = sgd_fit(train, config, warm);
      params = std::move(fit.params);
      report = fit.report;
    }
    const int threads = prediction_threads();
    if (task != Task::ranking) {
      const auto train_hat = predict(params, train.X, threads);
      if (task == Task::classification)
        summary["train_logloss"] = logloss(
            a.solver == "als" ? probit_proba(train_hat) : sigmoid_proba(train_hat), train.y);
      else
        summary["train_rmse"] = rmse(train_hat, train.y);
    }
    const SparseRowMatrix& target_X = test ? test->X : train.X;
    predictions = predict(params, target_X, threads);
    if (task == Task::classification)
      predictions = a.solver == "als" ? probit_proba(predictions) : sigmoid_proba(predictions);
    if (!a.model_out.empty()) save_model_file(a.model_out, params);
  }
  if (!a.pred_out.empty()) write_predictions(a.pred_out, predictions);

  summary["wall_time_s"] = report.wall_time;
  out << summary.dump() << '\n';
  return kOk;
}

int cmd_predict(const PredictArgs& a, std::ostream&) {
  const FMParams params = load_model_file(a.model);
  LibsvmOptions opts;
  opts.one_based = a.one_based;
  LabeledData data = read_libsvm_file(a.data, opts);
  const SparseRowMatrix X = align_columns(data.X, params.n_features(), a.clip_features, "data");
  std::vector<double> y_hat = predict(params, X, prediction_threads());
  if (a.proba) y_hat = probit_proba(y_hat);
  write_predictions(a.pred_out, y_hat);
  return kOk;
}

int cmd_benchmark(const BenchArgs& a, std::ostream&) {
  if (a.ranks.empty()) throw FlagError("--ranks needs at least one value");
  if (a.repeats == 0) throw FlagError("--repeats must be >= 1");
  LibsvmOptions opts;
  opts.one_based = a.one_based;
  LabeledData train = read_libsvm_file(a.train, opts);
  SparseRowMatrix X_test = train.X;
  if (!a.test.empty()) {
    X_test = read_libsvm_file(a.test, opts).X;
    X_test = align_columns(X_test, train.X.n_cols(), false, "test data");
  }
  SolverConfig base;
  base.n_iter = a.n_iter;
  base.init_std = a.init_std;
  base.set_l2_reg(a.l2_reg);
  base.seed = a.seed;
  const auto rows = run_rank_benchmark(train, X_test,
                                       a.solver == "als" ? BenchSolver::als : BenchSolver::mcmc,
                                       a.ranks, base, a.repeats);
  write_file(a.out, [&](std::ostream& f) { write_benchmark_csv(f, rows); });
  return kOk;
}

}  // namespace

int prediction_threads() {
  const char* env = std::getenv("FASTFM_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

std::vector<BenchmarkRow> run_rank_benchmark(const LabeledData& train,
                                             const SparseRowMatrix& X_test, BenchSolver solver,
                                             const std::vector<std::size_t>& ranks,
                                             const SolverConfig& base, std::size_t repeats) {
  std::vector<BenchmarkRow> rows;
  for (std::size_t rank : ranks) {
    for (std::size_t r = 0; r < repeats; ++r) {
      SolverConfig config = base;
      config.rank = rank;
      config.task = Task::regression;
      double seconds = 0.0;
      if (solver == BenchSolver::als) {
        seconds = als_fit(train, config).report.wall_time;
      } else {
        seconds = mcmc_fit_predict(train, X_test, config).report.wall_time;
      }
      rows.push_back({solver == BenchSolver::als ? "als" : "mcmc", rank, r, seconds});
    }
  }
  return rows;
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
  out << "solver,rank,repeat,seconds\n";
  for (const auto& r : rows)
    out << r.solver << ',' << r.rank << ',' << r.repeat << ',' << format_double(r.seconds) << '\n';
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Factorization machines: fit, predict and benchmark over libsvm files", "fastfm"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Train a model");
  fit_cmd->add_option("--task", fit.task, "r (regression), c (classification) or rank")
      ->required()
      ->check(CLI::IsMember({"r", "c", "rank"}));
  fit_cmd->add_option("--solver", fit.solver, "als, mcmc or sgd")
      ->required()
      ->check(CLI::IsMember({"als", "mcmc", "sgd"}));
  fit_cmd->add_option("--train", fit.train, "Training data (libsvm)")->required();
  fit_cmd->add_option("--test", fit.test, "Test data (libsvm); required for mcmc");
  fit_cmd->add_option("--pairs", fit.pairs, "Ranking pairs CSV winner_row,loser_row");
  fit_cmd->add_option("--rank", fit.rank, "Latent dimensions");
  fit_cmd->add_option("--n-iter", fit.n_iter, "Iterations / epochs");
  fit_cmd->add_option("--init-std", fit.init_std, "Std of the initial latent factors");
  fit_cmd->add_option("--l2-reg", fit.l2_reg, "L2 penalty for w and V");
  fit_cmd->add_option("--l2-reg-w", fit.l2_reg_w, "L2 penalty for w (overrides --l2-reg)");
  fit_cmd->add_option("--l2-reg-V", fit.l2_reg_V, "L2 penalty for V (overrides --l2-reg)");
  fit_cmd->add_option("--l2-reg-w0", fit.l2_reg_w0, "L2 penalty for the bias");
  fit_cmd->add_option("--step-size", fit.step_size, "SGD learning rate");
  fit_cmd->add_option("--seed", fit.seed, "Random seed");
  fit_cmd->add_option("--model-out", fit.model_out, "Write the fitted model here");
  fit_cmd->add_option("--pred-out", fit.pred_out, "Write predictions here");
  fit_cmd->add_option("--trace-out", fit.trace_out, "Write MCMC hyperparameter traces (CSV)");
  fit_cmd->add_option("--warm-start", fit.warm_start, "Start from this model file");
  fit_cmd->add_option("--n-features", fit.n_features, "Force the feature count");
  fit_cmd->add_flag("--one-based", fit.one_based, "Feature indices in files start at 1");
  fit_cmd->add_flag("--no-bias", fit.no_bias, "Do not fit the global bias w0");
  fit_cmd->add_flag("--clip-features", fit.clip_features,
                    "Drop test features the training data does not have");

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Predict with a saved model");
  pred_cmd->add_option("--model", pred.model, "Model file")->required();
  pred_cmd->add_option("--data", pred.data, "Data (libsvm)")->required();
  pred_cmd->add_option("--pred-out", pred.pred_out, "Output file")->required();
  pred_cmd->add_flag("--proba", pred.proba, "Emit Phi(y_hat) class probabilities");
  pred_cmd->add_flag("--clip-features", pred.clip_features,
                     "Ignore features beyond the model's feature count");
  pred_cmd->add_flag("--one-based", pred.one_based, "Feature indices start at 1");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Runtime versus rank");
  bench_cmd->add_option("--train", bench.train, "Training data (libsvm)")->required();
  bench_cmd->add_option("--test", bench.test, "Test data for mcmc (defaults to --train)");
  bench_cmd->add_option("--solver", bench.solver, "als or mcmc")
      ->required()
      ->check(CLI::IsMember({"als", "mcmc"}));
  bench_cmd->add_option("--ranks", bench.ranks, "Comma separated ranks")->delimiter(',');
  bench_cmd->add_option("--n-iter", bench.n_iter, "Fixed iteration count");
  bench_cmd->add_option("--repeats", bench.repeats, "Runs per rank");
  bench_cmd->add_option("--out", bench.out, "CSV output")->required();
  bench_cmd->add_option("--init-std", bench.init_std, "Std of the initial latent factors");
  bench_cmd->add_option("--l2-reg", bench.l2_reg, "L2 penalty (als)");
  bench_cmd->add_option("--seed", bench.seed, "Random seed");
  bench_cmd->add_flag("--one-based", bench.one_based, "Feature indices start at 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kFlagError;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out);
    if (pred_cmd->parsed()) return cmd_predict(pred, out);
    return cmd_benchmark(bench, out);
  } catch (const FlagError& e) {
    err << "error: " << e.what() << '\n';
    return kFlagError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const ModelFormatError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("fastfm");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace fastfm::cli
