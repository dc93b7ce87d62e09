#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "netcvx/admm.hpp"
#include "netcvx/atoms.hpp"
#include "netcvx/io.hpp"

namespace {

using namespace netcvx;

static void HuberProx(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  Vector a(n), v(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = u(rng);
    v[i] = u(rng);
  }
  const std::vector<AtomSpec> objective{atoms::huber(1.0, a, 1.0)};
  const NodeOperator op(objective, std::nullopt, n);
  for (auto _ : state) {
    op.prox(v, 3.0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(HuberProx)->RangeMultiplier(8)->Range(8, 8 << 9);

static void NetLassoEdgeProx(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Vector ca(n, 1.0), cb(n, -2.0), za(n), zb(n);
  const std::vector<EdgeAtomSpec> objective{atoms::netlasso(0.1)};
  const EdgeOperator op = EdgeOperator::reduce(objective);
  for (auto _ : state) {
    op.prox(ca, cb, 1.0, za, zb);
    benchmark::DoNotOptimize(za.data());
    benchmark::DoNotOptimize(zb.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(NetLassoEdgeProx)->RangeMultiplier(8)->Range(8, 8 << 9);

// One full ADMM iteration on the Huber / network-lasso family.
static void AdmmIteration(benchmark::State& state) {
  BenchmarkConfig config;
  config.nodes = static_cast<std::size_t>(state.range(0));
  config.dim = 10;
  const ProblemGraph g = make_benchmark_problem(config);
  SolverState s = admm::initialize(g, 1.0, std::nullopt, true);
  const StoppingCriteria crit;
  for (auto _ : state) {
    admm::x_update(s, 0);
    admm::z_update(s, 0);
    admm::u_update(s, 0);
    benchmark::DoNotOptimize(admm::residuals(s, crit));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(AdmmIteration)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

static void SolveBenchmarkInstance(benchmark::State& state) {
  BenchmarkConfig config;
  config.nodes = static_cast<std::size_t>(state.range(0));
  config.dim = 10;
  const ProblemGraph g = make_benchmark_problem(config);
  SolveOptions options;
  for (auto _ : state) {
    const SolveResult r = admm::solve(g, options);
    state.counters["iters"] = static_cast<double>(r.iters);
  }
  state.SetComplexityN(state.range(0) * 10);
}
BENCHMARK(SolveBenchmarkInstance)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond)->Complexity();

}  // namespace

BENCHMARK_MAIN();
