#include <benchmark/benchmark.h>

#include <vector>

#include "ranumopt/crosslayer.hpp"
#include "ranumopt/mac_solver.hpp"
#include "ranumopt/net_model.hpp"

using namespace ranumopt;

namespace {

Topology make_instance(int nodes, std::uint64_t seed) {
  GenConfig cfg;
  cfg.node_count = nodes;
  cfg.seed = seed;
  return generate_topology(cfg);
}

void bm_solve_mac(benchmark::State& state) {
  const Topology topo = make_instance(static_cast<int>(state.range(0)), 1);
  const TradeoffWeights w{1.0, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(solve_mac(topo, w));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_solve_mac)->Arg(10)->Arg(100)->Arg(400)->Complexity();

void bm_link_throughput(benchmark::State& state) {
  const Topology topo = make_instance(static_cast<int>(state.range(0)), 1);
  const ProbAssignment pa = ProbAssignment::equal_split(
      topo, std::vector<double>(topo.node_count(), 0.4));
  for (auto _ : state) benchmark::DoNotOptimize(link_throughput(topo, pa));
}
BENCHMARK(bm_link_throughput)->Arg(10)->Arg(100)->Arg(400);

void bm_gradient_step(benchmark::State& state) {
  const Topology topo = make_instance(100, 1);
  const SessionSet sessions = generate_sessions(topo, 10, 1);
  const ProbAssignment pa = ProbAssignment::equal_split(
      topo, std::vector<double>(topo.node_count(), 0.4));
  const DualState duals(topo, sessions, 1.0);
  const TradeoffWeights w{5.0, 1.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(mac_gradient_step(topo, pa, duals, w, 1e-4));
}
BENCHMARK(bm_gradient_step);

void bm_distributed_round(benchmark::State& state) {
  const Topology topo = make_instance(100, 1);
  const SessionSet sessions = generate_sessions(topo, 10, 1);
  const TradeoffWeights w{5.0, 1.0};
  SolverConfig cfg;
  cfg.max_iters = 50;
  cfg.record_dual = false;
  for (auto _ : state)
    benchmark::DoNotOptimize(distributed_solve(topo, sessions, w, cfg));
}
BENCHMARK(bm_distributed_round)->Unit(benchmark::kMillisecond);

void bm_dual_value(benchmark::State& state) {
  const Topology topo = make_instance(30, 1);
  const SessionSet sessions = generate_sessions(topo, 5, 1);
  const TradeoffWeights w{5.0, 1.0};
  const DualState duals(topo, sessions, 1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(dual_value(topo, sessions, w, duals));
}
BENCHMARK(bm_dual_value)->Unit(benchmark::kMillisecond);

void bm_centralized_solve(benchmark::State& state) {
  const Topology topo = make_instance(10, 1);
  const SessionSet sessions = generate_sessions(topo, 3, 1);
  const TradeoffWeights w{5.0, 1.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(centralized_solve(topo, sessions, w));
}
BENCHMARK(bm_centralized_solve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
