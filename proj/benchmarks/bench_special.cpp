#include <benchmark/benchmark.h>

#include "dropreg/dropout.hpp"
#include "dropreg/special.hpp"

namespace {

void BM_Dawson(benchmark::State& state) {
  const double u = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(dropreg::dawson(u));
}
BENCHMARK(BM_Dawson)->Arg(5)->Arg(30)->Arg(100)->Arg(1000);

void BM_KlLogUniform(benchmark::State& state) {
  const double eta = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(dropreg::kl_loguniform(eta));
}
BENCHMARK(BM_KlLogUniform)->Arg(1)->Arg(10)->Arg(100);

void BM_VarDropEffectivePenaltyBuild(benchmark::State& state) {
  for (auto _ : state) {
    dropreg::EffectivePenalty ep(dropreg::MethodSpec::vardrop(1.0));
    benchmark::DoNotOptimize(ep(1.0));
  }
}
BENCHMARK(BM_VarDropEffectivePenaltyBuild)->Unit(benchmark::kMillisecond);

void BM_VarDropEffectivePenaltyEval(benchmark::State& state) {
  dropreg::EffectivePenalty ep(dropreg::MethodSpec::vardrop(1.0));
  double w = 0.0;
  for (auto _ : state) {
    w = w < 5.0 ? w + 0.01 : 0.0;
    benchmark::DoNotOptimize(ep(w));
  }
}
BENCHMARK(BM_VarDropEffectivePenaltyEval);

}  // namespace

BENCHMARK_MAIN();
