// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "fastfm/model.hpp"
#include "fastfm/sparse.hpp"

namespace fastfm::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kFlagError = 2,
  kDataError = 3,
  kDiverged = 4,
};

/// Entry point shared by the `fastfm` binary and the tests. argv[0] is the
/// program name, argv[1] the subcommand (fit, predict, benchmark).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// Same, with `args` excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

enum class BenchSolver { als, mcmc };

struct BenchmarkRow {
  std::string solver;
  std::size_t rank;
  std::size_t repeat;
  double seconds;
};

/// Fits `repeats` models per rank with a fixed iteration count and records
/// the solver's wall time. MCMC accumulates predictions on `X_test`.
std::vector<BenchmarkRow> run_rank_benchmark(const LabeledData& train,
                                             const SparseRowMatrix& X_test, BenchSolver solver,
                                             const std::vector<std::size_t>& ranks,
                                             const SolverConfig& base, std::size_t repeats);

/// CSV `solver,rank,repeat,seconds`.
void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);

/// Threads for prediction from FASTFM_THREADS (default 1).
int prediction_threads();

}  // namespace fastfm::cli
