#include <benchmark/benchmark.h>

#include <cmath>

#include <Eigen/Core>

#include <lgq/geometry.hpp>
#include <lgq/oracles.hpp>
#include <lgq/specfun.hpp>
#include <lgq/spectral.hpp>

using namespace lgq;

namespace {

void BM_BesselK0(benchmark::State& state) {
  double x = 0.011;
  for (auto _ : state) {
    double acc = 0.0;
    for (int i = 0; i < 1000; ++i) acc += bessel_k0(x + 1e-4 * i);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_BesselK0);

void BM_AssembleLambda(benchmark::State& state) {
  const int n = (int)state.range(0);
  DiscretizedGraph g = discretize(Ring{10.0, 0.0}, 1.0, Resolution::by_count(n));
  LambdaSystem sys(g);
  for (auto _ : state) {
    Eigen::MatrixXd m = assemble_lambda(sys, 0.4);
    benchmark::DoNotOptimize(m.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_AssembleLambda)->Arg(100)->Arg(400)->Arg(1000)->Complexity(benchmark::oNSquared);

void BM_Inertia(benchmark::State& state) {
  const int n = (int)state.range(0);
  DiscretizedGraph g = discretize(Ring{10.0, 0.0}, 1.0, Resolution::by_count(n));
  LambdaSystem sys(g);
  Eigen::MatrixXd m = assemble_lambda(sys, 0.4);
  for (auto _ : state) {
    Inertia in = inertia(m);
    benchmark::DoNotOptimize(in);
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_Inertia)->Arg(100)->Arg(400)->Arg(1000)->Complexity(benchmark::oNCubed);

void BM_RingSolve(benchmark::State& state) {
  const int n = (int)state.range(0);
  DiscretizedGraph g = discretize(Ring{10.0, 0.0}, 1.0, Resolution::by_count(n));
  LambdaSystem sys(g);
  for (auto _ : state) {
    Spectrum sp = find_eigenvalues(sys, 0.22, 0.55, 40, 1e-10);
    benchmark::DoNotOptimize(sp.levels.data());
  }
}
BENCHMARK(BM_RingSolve)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_StarBSBuild(benchmark::State& state) {
  const int nodes = (int)state.range(0);
  for (auto _ : state) {
    StarBS bs(1.5707963267948966, 1.0, 8.0, nodes);
    benchmark::DoNotOptimize(bs.nodes_per_arm());
  }
}
BENCHMARK(BM_StarBSBuild)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_StarBSLambdaMax(benchmark::State& state) {
  StarBS bs(1.5707963267948966, 1.0, 8.0, (int)state.range(0));
  for (auto _ : state) {
    double l = bs.lambda_max(0.52);
    benchmark::DoNotOptimize(l);
  }
}
BENCHMARK(BM_StarBSLambdaMax)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_RingExact(benchmark::State& state) {
  for (auto _ : state) {
    auto levels = ring_exact_all(10.0, 1.0);
    benchmark::DoNotOptimize(levels.data());
  }
}
BENCHMARK(BM_RingExact);

}  // namespace

BENCHMARK_MAIN();
