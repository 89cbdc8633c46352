#include <benchmark/benchmark.h>

#include "cldrf/estimator.hpp"
#include "cldrf/metrics.hpp"
#include "cldrf/model_core.hpp"
#include "cldrf/rng.hpp"
#include "cldrf/simulation.hpp"

using namespace cldrf;

static void BM_Generate(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        auto labeled = generate({Scenario::LinearC4, n, seed++});
        benchmark::DoNotOptimize(labeled.data.y.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Generate)->Arg(400)->Arg(800)->Arg(3200)->Complexity();

static void BM_WeightedOls(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    Rng rng(3);
    Matrix Z(n, 3);
    Vector y(n);
    std::vector<int> members;
    for (int i = 0; i < n; ++i) {
        Z(i, 0) = 1.0;
        Z(i, 1) = rng.uniform(-3, 3);
        Z(i, 2) = rng.uniform(0, 0.4);
        y[i] = rng.normal();
        members.push_back(i);
    }
    for (auto _ : state) {
        auto alpha = weighted_ols(Z, y, members);
        benchmark::DoNotOptimize(alpha.data());
    }
}
BENCHMARK(BM_WeightedOls)->Arg(100)->Arg(400)->Arg(1600);

static void BM_FitLinearC4(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    const auto labeled = generate({Scenario::LinearC4, n, 11});
    FitOptions options;
    options.C = 4;
    options.spec = scenario_default_spec(Scenario::LinearC4);
    for (auto _ : state) {
        options.seed++;
        auto result = fit(labeled.data, options);
        benchmark::DoNotOptimize(result.objective_trace.data());
    }
}
BENCHMARK(BM_FitLinearC4)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);

static void BM_FitMotivatingQuadratic(benchmark::State& state) {
    const auto labeled = generate({Scenario::Motivating, 800, 11});
    FitOptions options;
    options.C = 4;
    options.spec = ModelSpec::quadratic(true);
    for (auto _ : state) {
        options.seed++;
        auto result = fit(labeled.data, options);
        benchmark::DoNotOptimize(result.objective_trace.data());
    }
}
BENCHMARK(BM_FitMotivatingQuadratic)->Unit(benchmark::kMillisecond);

static void BM_RandIndex(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    Rng rng(5);
    ClusterAssignment a;
    ClusterAssignment b;
    a.C = b.C = 5;
    for (int i = 0; i < n; ++i) {
        a.labels.push_back(1 + static_cast<int>(rng.below(5)));
        b.labels.push_back(1 + static_cast<int>(rng.below(5)));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(rand_index(a, b));
    }
}
BENCHMARK(BM_RandIndex)->Arg(800)->Arg(8000);

BENCHMARK_MAIN();
