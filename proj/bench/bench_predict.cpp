// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

// Prediction kernels: naive double loop, serial linear-time, OpenMP.

#include <benchmark/benchmark.h>

#include <map>
#include <thread>

#include "fastfm/model.hpp"
#include "support/synthetic.hpp"

namespace {

using namespace fastfm;

struct Fixture {
  FMParams params;
  SparseRowMatrix X;
};

const Fixture& fixture(std::size_t rank) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(rank);
  if (it == cache.end()) {
    Rng rng(42);
    Fixture f{testing::random_params(rng, 2000, rank, 0.1),
              testing::random_sparse(rng, 20000, 2000, 0.01)};
    it = cache.emplace(rank, std::move(f)).first;
  }
  return it->second;
}

void BM_PredictNaive(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.X.n_rows(); ++i) acc += predict_naive(f.params, f.X.row(i));
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.X.n_rows()));
}

void BM_PredictSerial(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(predict_serial(f.params, f.X));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.X.n_rows()));
}

void BM_PredictParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(predict(f.params, f.X, threads));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.X.n_rows()));
}

void thread_args(benchmark::internal::Benchmark* b) {
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  for (int k : {8, 32})
    for (int t = 1; t <= hw; t *= 2) b->Args({k, t});
}

BENCHMARK(BM_PredictNaive)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictParallel)->Apply(thread_args)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
