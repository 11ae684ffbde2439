#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "cotkit/analyzer.hpp"

namespace {

using namespace cotkit;

std::vector<AccCv> random_points(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> acc(0.3, 0.9);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<AccCv> pts(n);
    for (auto& p : pts) {
        p.acc = acc(rng);
        p.cv = 0.42 * std::pow(p.acc, -2.3) * std::exp(noise(rng));
    }
    return pts;
}

void BM_ParetoFrontier(benchmark::State& state) {
    const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(pareto_frontier(pts).size());
}
BENCHMARK(BM_ParetoFrontier)->Arg(64)->Arg(640)->Arg(6400);

void BM_PowerLawBootstrap(benchmark::State& state) {
    const auto pts = random_points(64, 2);
    PowerLawOptions opt;
    opt.pareto_only = false;
    for (auto _ : state) benchmark::DoNotOptimize(fit_power_law(pts, opt).alpha);
}
BENCHMARK(BM_PowerLawBootstrap)->Unit(benchmark::kMillisecond);

void BM_PairedTTest(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d(0.05, 0.1);
    std::vector<double> diff(64);
    for (auto& x : diff) x = d(rng);
    for (auto _ : state) benchmark::DoNotOptimize(paired_t_test(diff, 5).p_raw);
}
BENCHMARK(BM_PairedTTest);

}  // namespace
