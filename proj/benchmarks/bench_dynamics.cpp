#include "skalg/builtins.hpp"

#include <benchmark/benchmark.h>

using namespace skalg;

namespace {

void BM_IntegrateGeodesic(benchmark::State& state, const char* name) {
  const auto d = load_spec(builtins::builtin(name));
  const TotalPoint q0{d.samples(1, 0).front(), 0.5 * sample_fibers(d.rank(), 1, 0).front()};
  const ForceField f = ForceField::zero(d.rank());
  for (auto _ : state) benchmark::DoNotOptimize(integrate_forced(d.algebroid, d.metric, f, q0, 0.0, 1.0, 1e-2));
}
BENCHMARK_CAPTURE(BM_IntegrateGeodesic, planar_body, "planar_body")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_IntegrateGeodesic, snakeboard, "snakeboard")->Unit(benchmark::kMillisecond);

void BM_DecouplingCheck(benchmark::State& state) {
  const auto d = load_spec(builtins::planar_body());
  const auto pts = d.samples(32, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(is_decoupling(d.algebroid, d.metric, d.total_force(), d.controls, d.section("Y1"), pts, 1e-5));
  }
}
BENCHMARK(BM_DecouplingCheck)->Unit(benchmark::kMillisecond);

}  // namespace
