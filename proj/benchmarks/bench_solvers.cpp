#include <random>

#include <benchmark/benchmark.h>
#include <Eigen/Core>

#include "dropreg/penalty.hpp"
#include "dropreg/problem.hpp"
#include "dropreg/solvers.hpp"

namespace {

dropreg::Problem make_problem(int n, int d, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index j = 0; j < X.size(); ++j) X.data()[j] = normal(rng);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < k; ++j) w[j] = normal(rng) > 0.0 ? 1.0 : -1.0;
  dropreg::Problem p;
  p.X = dropreg::standardize(X).X;
  p.y = p.X * w;
  return p;
}

void BM_IrlsL1(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto p = make_problem(d * 5 / 8, d, 5, 11);
  dropreg::SolverConfig cfg;
  cfg.lambda = 1e-4;
  cfg.iters = 100;
  cfg.log_every = 100;
  for (auto _ : state) benchmark::DoNotOptimize(dropreg::irls(p, dropreg::PenaltySpec::l1(), cfg));
}
BENCHMARK(BM_IrlsL1)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Iht(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto p = make_problem(d / 2, d, 10, 13);
  dropreg::SolverConfig cfg;
  cfg.step = 0.1;
  cfg.iters = 100;
  cfg.log_every = 100;
  for (auto _ : state) benchmark::DoNotOptimize(dropreg::iht(p, 10, cfg));
}
BENCHMARK(BM_Iht)->Arg(100)->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond);

void BM_AdaProxLogSum(benchmark::State& state) {
  const auto p = make_problem(100, 200, 8, 17);
  dropreg::SolverConfig cfg;
  cfg.lambda = 0.05;
  cfg.step = 0.2;
  cfg.iters = 100;
  cfg.log_every = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dropreg::ada_prox(p, dropreg::PenaltySpec::log_sum(1.0), cfg));
  }
}
BENCHMARK(BM_AdaProxLogSum)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
