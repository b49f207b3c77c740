#include "skalg/builtins.hpp"

#include <benchmark/benchmark.h>

using namespace skalg;

namespace {

void BM_Christoffel(benchmark::State& state, const char* name) {
  const auto d = load_spec(builtins::builtin(name));
  const BasePoint p = d.samples(1, 0).front();
  for (auto _ : state) benchmark::DoNotOptimize(christoffel(d.algebroid, d.metric, p));
}
BENCHMARK_CAPTURE(BM_Christoffel, planar_body, "planar_body");
BENCHMARK_CAPTURE(BM_Christoffel, robotic_leg, "robotic_leg");
BENCHMARK_CAPTURE(BM_Christoffel, snakeboard, "snakeboard");

void BM_SymmetricProduct(benchmark::State& state) {
  const auto d = load_spec(builtins::snakeboard());
  const BasePoint p = d.samples(1, 0).front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(symmetric_product(d.algebroid, d.metric, d.section("X2"), d.section("X3"), p));
  }
}
BENCHMARK(BM_SymmetricProduct);

}  // namespace
