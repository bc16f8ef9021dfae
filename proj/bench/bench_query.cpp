#include <random>

#include <benchmark/benchmark.h>

#include "loggpis/map.hpp"
#include "loggpis/scenario.hpp"

using namespace loggpis;

namespace {

const ClusterMap &CircleMap() {
    static const ClusterMap map = [] {
        MapConfig c;
        c.dim = 2;
        c.arena_min = Vector::Constant(2, -10);
        c.arena_max = Vector::Constant(2, 10);
        c.kernel.lambda = 40;
        AnalyticScene scene(2);
        scene.AddCircle(Vector::Zero(2), 5.0);
        ClusterMap m(c);
        m.Insert(OracleSurfacePoints(scene, 0.02, 0.01));
        m.RefitDirty();
        return m;
    }();
    return map;
}

Points Queries(Eigen::Index n) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-9.0, 9.0);
    Points q(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) q.row(i) << u(rng), u(rng);
    return q;
}

void BM_QueryBatchSerial(benchmark::State &state) {
    const ClusterMap &map = CircleMap();
    const Points q = Queries(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(map.QueryBatchSerial(q));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_QueryBatchParallel(benchmark::State &state) {
    const ClusterMap &map = CircleMap();
    const Points q = Queries(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(map.QueryBatch(q));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_JointCovMatrix(benchmark::State &state) {
    const Eigen::Index n = state.range(0);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Points x(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) x.row(i) << u(rng), u(rng), u(rng);
    KernelParams p;
    p.lambda = 10;
    for (auto _ : state) benchmark::DoNotOptimize(JointCovMatrix(x, x, p, true));
}

}  // namespace

BENCHMARK(BM_QueryBatchSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QueryBatchParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JointCovMatrix)->Arg(50)->Arg(200)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
