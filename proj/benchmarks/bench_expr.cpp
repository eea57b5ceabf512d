#include <benchmark/benchmark.h>

#include "edsym/expr.hpp"
#include "edsym/sample.hpp"

using namespace edsym;

static void BM_expand_power(benchmark::State& state) {
  Expr x = sym("x"), y = sym("y");
  for (auto _ : state) {
    benchmark::DoNotOptimize(pow(x + y + num(1), state.range(0)));
  }
}
BENCHMARK(BM_expand_power)->Arg(4)->Arg(8)->Arg(12);

static void BM_diff_nested(benchmark::State& state) {
  Expr x = sym("x"), y = sym("y");
  Expr f = exp(x * y) / sqrt(num(1) + x * x) + log(x + y) * sin(x * y);
  for (auto _ : state) {
    benchmark::DoNotOptimize(diff(f, "x"));
  }
}
BENCHMARK(BM_diff_nested);

static void BM_certify_zero(benchmark::State& state) {
  SampleDomain d;
  d.coords = {"x", "y"};
  SamplePlan plan;
  Expr x = sym("x"), y = sym("y");
  Expr e = sqrt(x) * sqrt(y) - sqrt(x * y);
  for (auto _ : state) {
    benchmark::DoNotOptimize(certify_zero(e, d, plan));
  }
}
BENCHMARK(BM_certify_zero);

BENCHMARK_MAIN();
