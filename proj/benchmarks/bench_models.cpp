#include "mdyn/closure.hpp"
#include "mdyn/embedding.hpp"
#include "mdyn/linear_gaussian.hpp"
#include "mdyn/lorenz96.hpp"
#include "mdyn/random.hpp"
#include "mdyn/tbh.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace mdyn;

void BM_TbhRhs(benchmark::State& state) {
    TBHParams p;
    p.Lambda = static_cast<int>(state.range(0));
    Rng rng = make_stream(11);
    const CVector u = tbh_initial_condition(p, rng);
    for (auto _ : state) benchmark::DoNotOptimize(tbh_rhs(p, u));
}
BENCHMARK(BM_TbhRhs)->Arg(16)->Arg(50);

void BM_L96Rk4Step(benchmark::State& state) {
    L96Params p;
    p.K = 18;
    p.J = static_cast<int>(state.range(0));
    p.eps = 0.0078125;
    Rng rng = make_stream(12);
    L96State s = l96_initial_condition(p, rng);
    for (auto _ : state) {
        l96_rk4_step(p, s, 1e-4);
        benchmark::DoNotOptimize(s.X.data());
    }
}
BENCHMARK(BM_L96Rk4Step)->Arg(8)->Arg(20);

void BM_ClosureStep(benchmark::State& state) {
    LinearGaussianParams p;
    p.eps = 1.3;
    const DelayConfig delay{static_cast<int>(state.range(0)), 0};
    Rng rng = make_stream(13);
    const LinearGaussianRun run = simulate_linear_gaussian(p, 100.0, 0.01, rng);
    const DesignMatrices dm = build_delay_states(run.data, delay);
    auto fitted = std::make_shared<const ConditionalExpectationModel>(
        fit_conditional_expectation(dm, Basis(fit_pod(dm.Z, EnergyFraction{1.0})), 0.0));
    auto y_hat = std::make_shared<EmbeddingPredictor>(
        std::vector<ComponentEstimator>{{fitted, {0}, {0}, {0}}}, delay, 1);
    const ClosureModel model = linear_gaussian_closure(p, y_hat, delay, 0.01, 10);
    ClosureState s = seed_state(run.data, static_cast<std::size_t>(delay.depth()), delay);
    for (auto _ : state) benchmark::DoNotOptimize(step(model, s, rng));
}
BENCHMARK(BM_ClosureStep)->Arg(0)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
