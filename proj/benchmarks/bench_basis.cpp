#include "mdyn/basis.hpp"
#include "mdyn/embedding.hpp"
#include "mdyn/random.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace mdyn;

void BM_HermiteEvaluate(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const int degree = static_cast<int>(state.range(1));
    Rng rng = make_stream(7);
    const Matrix Z = standard_normal(rng, 2000, dim);
    const HermiteBasis b = fit_hermite(Z, degree, degree);
    const Vector z = Z.row(0).transpose();
    for (auto _ : state) benchmark::DoNotOptimize(b.evaluate(z));
    state.counters["features"] = b.size();
}
BENCHMARK(BM_HermiteEvaluate)->Args({1, 5})->Args({1, 50})->Args({2, 10})->Args({3, 6});

void BM_PodEvaluateRows(benchmark::State& state) {
    const auto dim = state.range(0);
    Rng rng = make_stream(8);
    const Matrix Z = standard_normal(rng, 4000, dim);
    const PODBasis b = fit_pod(Z, EnergyFraction{1.0});
    Matrix out(Z.rows(), b.size());
    for (auto _ : state) {
        b.evaluate_rows(Z, out);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * Z.rows());
}
BENCHMARK(BM_PodEvaluateRows)->Arg(21)->Arg(101);

void BM_FitConditionalExpectation(benchmark::State& state) {
    const auto rows = state.range(0);
    Rng rng = make_stream(9);
    DesignMatrices dm;
    dm.Z = standard_normal(rng, rows, 1);
    dm.G = dm.Z.array().cube().matrix() + 0.1 * standard_normal(rng, rows, 1);
    const Basis basis(fit_hermite(dm.Z, 5, 5));
    for (auto _ : state) benchmark::DoNotOptimize(fit_conditional_expectation(dm, basis, 1e-8));
    state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_FitConditionalExpectation)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_FitPodLongMemory(benchmark::State& state) {
    const auto lags = state.range(0);
    Rng rng = make_stream(10);
    DesignMatrices dm;
    dm.Z = standard_normal(rng, 20000, lags + 1);
    dm.G = standard_normal(rng, 20000, 1);
    for (auto _ : state) {
        const Basis basis(fit_pod(dm.Z, EnergyFraction{1.0}));
        benchmark::DoNotOptimize(fit_conditional_expectation(dm, basis, 0.0));
    }
}
BENCHMARK(BM_FitPodLongMemory)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
