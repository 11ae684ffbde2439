#include <benchmark/benchmark.h>

#include "cotkit/bayes_opt.hpp"
#include "cotkit/synthetic_surface.hpp"

namespace {

using namespace cotkit;

void BM_BoLoopSynthetic(benchmark::State& state) {
    const auto reg = reference_model_registry();
    const auto space = ConfigSpace::full(reg);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const SyntheticSurface surface(reg, seed);
        BoOptions opt;
        opt.seed = seed++;
        auto r = bo_loop(space, [&](const TransferConfig& c) { return surface(c); }, opt);
        benchmark::DoNotOptimize(r.steps.size());
    }
}
BENCHMARK(BM_BoLoopSynthetic)->Unit(benchmark::kMillisecond);

void BM_GpFitPosterior(benchmark::State& state) {
    const auto reg = reference_model_registry();
    const auto space = ConfigSpace::full(reg);
    const auto all = space.enumerate();
    const SyntheticSurface surface(reg, 3);
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<Observation> obs;
    for (std::size_t i = 0; i < n; ++i) obs.push_back({all[(i * 37) % all.size()], surface(all[(i * 37) % all.size()]), {}});
    const auto d = metric_parts(ConfigMetric(reg));
    for (auto _ : state) {
        const auto gp = gp_fit(obs, {}, d);
        double s = 0.0;
        for (const auto& c : all) s += gp.posterior(c).mean;
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_GpFitPosterior)->Arg(8)->Arg(15)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
