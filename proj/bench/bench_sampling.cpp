// Serial reference against the OpenMP path for the samplers behind every Monte Carlo
// check. Outputs are identical by construction; only wall time differs.

#include <benchmark/benchmark.h>

#include "cevlab/montecarlo.hpp"
#include "cevlab/spectral.hpp"
#include "cevlab/zoo.hpp"

using namespace cevlab;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(1) == 0 ? Exec::Serial : Exec::Parallel; }

void label(benchmark::State& state) {
  state.SetLabel(state.range(1) == 0 ? "serial" : "parallel");
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BivariateNormal(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(zoo::sample_bivariate_normal(0.5, static_cast<std::size_t>(state.range(0)), 7,
                                                          exec_of(state), 0));
  }
  label(state);
}

void BM_LogisticPareto(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        zoo::sample_logistic_pareto(0.5, static_cast<std::size_t>(state.range(0)), 7, exec_of(state), 0));
  }
  label(state);
}

void BM_MuStarSampler(benchmark::State& state) {
  const spectral::MuStar m(spectral::parse_spectral("beta:2,3"));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        spectral::sample_from_mu_star(m, static_cast<std::size_t>(state.range(0)), 7, exec_of(state), 0));
  }
  label(state);
}

void BM_ConvergenceStudy(benchmark::State& state) {
  const auto model = zoo::parse_model("mix1");
  const std::vector<double> probs{1e-1, 1e-2, 1e-3};
  mc::StudyOptions o;
  o.exec = exec_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mc::convergence_study(model, probs, static_cast<std::size_t>(state.range(0)), 7, o));
  }
  label(state);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (long n : {1L << 18, 1L << 21}) {
    b->Args({n, 0});
    b->Args({n, 1});
  }
  b->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_BivariateNormal)->Apply(sizes);
BENCHMARK(BM_LogisticPareto)->Apply(sizes);
BENCHMARK(BM_MuStarSampler)->Apply(sizes);
BENCHMARK(BM_ConvergenceStudy)->Apply(sizes);

BENCHMARK_MAIN();
