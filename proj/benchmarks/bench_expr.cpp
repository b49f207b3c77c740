#include "skalg/expr.hpp"

#include <benchmark/benchmark.h>

using namespace skalg;

namespace {

const char* kSource = "4*sin(2*phi)/(cos(2*phi)^2 - 14*cos(2*phi) + 45) + J/(h*(J + m*h^2))";

void BM_Parse(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(parse(kSource));
}
BENCHMARK(BM_Parse);

void BM_EvalTree(benchmark::State& state) {
  const Expr e = parse(kSource);
  const Bindings b{{"phi", 0.3}, {"J", 1}, {"h", 1}, {"m", 1}};
  for (auto _ : state) benchmark::DoNotOptimize(eval(e, b));
}
BENCHMARK(BM_EvalTree);

void BM_EvalBound(benchmark::State& state) {
  const std::vector<std::string> slots = {"phi"};
  const BoundExpr e(parse(kSource), slots, Bindings{{"J", 1}, {"h", 1}, {"m", 1}});
  const std::vector<double> x = {0.3};
  for (auto _ : state) benchmark::DoNotOptimize(e(x));
}
BENCHMARK(BM_EvalBound);

}  // namespace

BENCHMARK_MAIN();
