#include <benchmark/benchmark.h>

#include "rmkit/grid.hpp"
#include "rmkit/learner.hpp"
#include "rmkit/oracle.hpp"
#include "rmkit/unroll.hpp"

using namespace rmkit;

namespace {

SubtaskBindings bindings_for(int n) {
  SubtaskBindings b;
  for (int i = 1; i <= n; ++i) b["b"].push_back("b" + std::to_string(i));
  return b;
}

void BM_unroll_boolean(benchmark::State& state) {
  int n = (int)state.range(0);
  RewardMachine numeric = delivery_numeric_rm(n);
  for (auto _ : state)
    benchmark::DoNotOptimize(unroll_to_boolean(numeric, bindings_for(n)));
}
BENCHMARK(BM_unroll_boolean)->DenseRange(2, 6);

void BM_unroll_coupled(benchmark::State& state) {
  int n = (int)state.range(0);
  RewardMachine numeric = delivery_numeric_rm(n);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        split_to_coupled(unroll_to_agenda(numeric, bindings_for(n))));
}
BENCHMARK(BM_unroll_coupled)->DenseRange(2, 8);

void BM_env_step(benchmark::State& state) {
  GridMap map = delivery_example_map();
  GridState s = env_reset(map);
  int a = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(env_step(s, (Action)(a++ % kNumActions), map));
  }
}
BENCHMARK(BM_env_step);

void BM_learning_steps(benchmark::State& state) {
  GridMap map = delivery_random_map(6, 6, 3, 7);
  auto rm = split_to_coupled(
      unroll_to_agenda(task_numeric_rm(map), feature_catalog(map).bindings));
  for (auto _ : state) {
    Learner learner(Algo::CoRM, map, rm, {}, 1);
    while (learner.total_steps() < 5000) learner.run_episode(1000);
    benchmark::DoNotOptimize(learner.total_updates());
  }
}
BENCHMARK(BM_learning_steps)->Unit(benchmark::kMillisecond);

void BM_oracle(benchmark::State& state) {
  GridMap map = delivery_random_map(8, 8, (int)state.range(0), 3);
  RewardMachine rm = task_numeric_rm(map);
  for (auto _ : state)
    benchmark::DoNotOptimize(bfs_optimal_length(map, rm));
}
BENCHMARK(BM_oracle)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
