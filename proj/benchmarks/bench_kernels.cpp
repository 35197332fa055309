#include <benchmark/benchmark.h>

#include "sbmg/bench.hpp"

using namespace sbmg;

namespace {

Problem tau_problem(int d, int n, int family) { return make_problem(Algebra::Tau, d, n, 1, 1, {family, 1}); }

void BM_Matvec2D(benchmark::State& state) {
  const Problem pb = tau_problem(2, int(state.range(0)), 7);
  const Vec x(pb.op.size(), 1.0);
  Vec y(pb.op.size());
  for (auto _ : state) {
    matvec(pb.op, x.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(pb.op.size()));
}
BENCHMARK(BM_Matvec2D)->Arg(63)->Arg(127)->Arg(255)->Arg(511);

void BM_VCycle2D(benchmark::State& state) {
  const Problem pb = tau_problem(2, int(state.range(0)), 1);
  HierarchyOptions o;
  o.symbol = pb.symbol;
  const LevelHierarchy h = build_hierarchy(pb.op, pb.psym, o);
  Workspace ws = make_workspace(h);
  const Vec b(pb.op.size(), 1.0);
  Vec x(pb.op.size(), 0.0);
  for (auto _ : state) {
    mgm_vcycle(h, 0, x, b, {}, ws);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(pb.op.size()));
}
BENCHMARK(BM_VCycle2D)->Arg(63)->Arg(127)->Arg(255)->Unit(benchmark::kMillisecond);

void BM_VCycle1D(benchmark::State& state) {
  const Problem pb = tau_problem(1, int(state.range(0)), 4);
  HierarchyOptions o;
  o.symbol = pb.symbol;
  const LevelHierarchy h = build_hierarchy(pb.op, pb.psym, o);
  Workspace ws = make_workspace(h);
  const Vec b(pb.op.size(), 1.0);
  Vec x(pb.op.size(), 0.0);
  for (auto _ : state) {
    mgm_vcycle(h, 0, x, b, {}, ws);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_VCycle1D)->Arg(127)->Arg(511)->Arg(2047)->Arg(8191)->Arg(32767);

void BM_BuildHierarchy2D(benchmark::State& state) {
  const Problem pb = tau_problem(2, int(state.range(0)), 9);
  HierarchyOptions o;
  o.symbol = pb.symbol;
  for (auto _ : state) benchmark::DoNotOptimize(build_hierarchy(pb.op, pb.psym, o).depth());
}
BENCHMARK(BM_BuildHierarchy2D)->Arg(127)->Arg(255)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
