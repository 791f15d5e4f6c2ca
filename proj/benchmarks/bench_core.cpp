#include <benchmark/benchmark.h>

#include "lambdacoal/classification.hpp"
#include "lambdacoal/coalescent.hpp"
#include "lambdacoal/diagnostics.hpp"
#include "lambdacoal/mmspace.hpp"
#include "lambdacoal/rates.hpp"
#include "lambdacoal/ultrametric.hpp"

using namespace lambdacoal;

static void BM_LambdaRow(benchmark::State& state) {
    const LambdaMeasure m = parse_measure("beta:0.5,1.5");
    const int b = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(lambda_row(m, b));
}
BENCHMARK(BM_LambdaRow)->Arg(64)->Arg(512)->Arg(4096);

static void BM_RateTableAggregates(benchmark::State& state) {
    const LambdaMeasure m = parse_measure("bolthausen-sznitman");
    const int b_max = static_cast<int>(state.range(0));
    for (auto _ : state) {
        const RateTable table = build_rate_table(m, b_max, 64);
        benchmark::DoNotOptimize(table.cdi_denominator(b_max));
    }
}
BENCHMARK(BM_RateTableAggregates)->Arg(10000)->Arg(100000)->Arg(1000000)
    ->Unit(benchmark::kMillisecond);

static void BM_Psi(benchmark::State& state) {
    const LambdaMeasure m = parse_measure("beta:0.5,1.5");
    double q = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(psi(m, q));
        q = q < 1e8 ? q * 1.1 : 1.0;
    }
}
BENCHMARK(BM_Psi);

static void BM_Classify(benchmark::State& state) {
    const LambdaMeasure m = parse_measure("beta:0.75,1.25");
    ClassificationConfig cfg;
    cfg.series_b_max = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(classify(m, cfg));
}
BENCHMARK(BM_Classify)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

static void BM_SimulateGillespie(benchmark::State& state) {
    const LambdaMeasure m = parse_measure("bolthausen-sznitman");
    const int n = static_cast<int>(state.range(0));
    const MergerWeightTable rows(m, n);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        SimConfig cfg;
        cfg.n = n;
        cfg.seed = ++seed;
        cfg.scheme = Scheme::Gillespie;
        benchmark::DoNotOptimize(simulate_gillespie(m, cfg, &rows));
    }
}
BENCHMARK(BM_SimulateGillespie)->Arg(100)->Arg(400)->Arg(1600)
    ->Unit(benchmark::kMicrosecond);

static void BM_SimulateKingman(benchmark::State& state) {
    const LambdaMeasure m = parse_measure("kingman");
    const int n = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        SimConfig cfg;
        cfg.n = n;
        cfg.seed = ++seed;
        cfg.scheme = Scheme::Gillespie;
        benchmark::DoNotOptimize(simulate(m, cfg));
    }
}
BENCHMARK(BM_SimulateKingman)->Arg(100)->Arg(1600)->Unit(benchmark::kMicrosecond);

static void BM_SimulatePoisson(benchmark::State& state) {
    const LambdaMeasure m = parse_measure("0.75*uniform:0.25,1");
    const int n = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        SimConfig cfg;
        cfg.n = n;
        cfg.seed = ++seed;
        cfg.scheme = Scheme::Poisson;
        benchmark::DoNotOptimize(simulate_poisson(m, cfg));
    }
}
BENCHMARK(BM_SimulatePoisson)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

static void BM_TreeFunctionals(benchmark::State& state) {
    const LambdaMeasure m = parse_measure("bolthausen-sznitman");
    SimConfig cfg;
    cfg.n = static_cast<int>(state.range(0));
    cfg.seed = 33;
    cfg.scheme = Scheme::Gillespie;
    const CoalescentHistory h = simulate(m, cfg);
    for (auto _ : state) {
        const UltrametricSpace tree = tree_from_history(h);
        benchmark::DoNotOptimize(xi_epsilon(tree, 0.1));
        benchmark::DoNotOptimize(moduli_of_mass(tree, 0.05));
        benchmark::DoNotOptimize(distance_distribution(tree));
    }
}
BENCHMARK(BM_TreeFunctionals)->Arg(400)->Arg(1600)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
