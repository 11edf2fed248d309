// Serial reference kernels against their chunked OpenMP versions, plus the
// Monte-Carlo oracle and one quadrature evaluation of the population operator.
// The parallel variants take the thread count as the second argument.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <map>

#include <mixreg/kernels.hpp>
#include <mixreg/model.hpp>
#include <mixreg/population.hpp>

using namespace mixreg;

namespace {

const Dataset& data(Eigen::Index n) {
  static std::map<Eigen::Index, Dataset> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    ModelConfig m;
    m.theta_star = Vector::LinSpaced(10, -1.0, 1.0);
    it = cache.emplace(n, generate_dataset(m, n, Seed{1, 0})).first;
  }
  return it->second;
}

const Vector kTheta = Vector::LinSpaced(10, 0.5, -0.5);

void BM_em_moment_serial(benchmark::State& state) {
  const Dataset& d = data(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::em_moment_serial(d.X, d.Y, kTheta, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_em_moment_parallel(benchmark::State& state) {
  const Dataset& d = data(state.range(0));
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::em_moment(d.X, d.Y, kTheta, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_loglik_serial(benchmark::State& state) {
  const Dataset& d = data(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::mixture_loglik_serial(d.X, d.Y, kTheta, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_loglik_parallel(benchmark::State& state) {
  const Dataset& d = data(state.range(0));
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::mixture_loglik(d.X, d.Y, kTheta, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_weighted_gram_serial(benchmark::State& state) {
  const Dataset& d = data(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::weighted_gram_serial(d.X, d.Y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_weighted_gram_parallel(benchmark::State& state) {
  const Dataset& d = data(state.range(0));
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::weighted_gram(d.X, d.Y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_mc_oracle(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(1)));
  Vector ts(2), th(2);
  ts << 1.0, 0.5;
  th << 0.3, 0.8;
  for (auto _ : state) benchmark::DoNotOptimize(mc_population_em(th, ts, 1.0, state.range(0), Seed{2, 0}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_population_em(benchmark::State& state) {
  Vector ts(2), th(2);
  ts << static_cast<double>(state.range(0)), 0.0;
  th << 0.6 * state.range(0), 0.8 * state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(population_em(th, ts, 1.0));
}

const int kMaxThreads = omp_get_num_procs();

void threads_args(benchmark::internal::Benchmark* b) {
  for (long n : {10'000L, 200'000L})
    for (long t = 1; t <= kMaxThreads; t *= 2) b->Args({n, t});
}

}  // namespace

BENCHMARK(BM_em_moment_serial)->Arg(10'000)->Arg(200'000);
BENCHMARK(BM_em_moment_parallel)->Apply(threads_args);
BENCHMARK(BM_loglik_serial)->Arg(10'000)->Arg(200'000);
BENCHMARK(BM_loglik_parallel)->Apply(threads_args);
BENCHMARK(BM_weighted_gram_serial)->Arg(10'000)->Arg(200'000);
BENCHMARK(BM_weighted_gram_parallel)->Apply(threads_args);
BENCHMARK(BM_mc_oracle)
    ->Apply([](benchmark::internal::Benchmark* b) {
      for (long t = 1; t <= kMaxThreads; t *= 2) b->Args({1'000'000, t});
    })
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_population_em)->Arg(1)->Arg(40)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
