#include <benchmark/benchmark.h>

#include <random>

#include "cotkit/compress.hpp"
#include "cotkit/scorer.hpp"
#include "cotkit/selector.hpp"

namespace {

using namespace cotkit;

const std::vector<ReasoningTrace>& fixture_traces() {
    static const auto traces = load_traces(COTKIT_FIXTURE_DIR "/traces.jsonl", Tokenizer::approximate());
    return traces;
}

CompressionContext fixture_context() {
    CompressionContext ctx;
    ctx.segmenter.lexicon = Lexicon::load(COTKIT_FIXTURE_DIR "/lexicon.txt");
    return ctx;
}

void BM_SummarizeTrace(benchmark::State& state) {
    const auto ctx = fixture_context();
    const auto& traces = fixture_traces();
    const auto budget = static_cast<std::size_t>(state.range(0));
    std::size_t i = 0;
    for (auto _ : state) {
        auto c = compress_trace(traces[i++ % traces.size()], budget, Strategy::summarization, ctx);
        benchmark::DoNotOptimize(c.token_count);
    }
}
BENCHMARK(BM_SummarizeTrace)->Arg(64)->Arg(128)->Arg(256);

void BM_Truncate(benchmark::State& state) {
    const auto ctx = fixture_context();
    const auto& traces = fixture_traces();
    std::size_t i = 0;
    for (auto _ : state) {
        auto c = compress_trace(traces[i++ % traces.size()], 128, Strategy::truncation, ctx);
        benchmark::DoNotOptimize(c.token_count);
    }
}
BENCHMARK(BM_Truncate);

void BM_Segment(benchmark::State& state) {
    const auto ctx = fixture_context();
    const auto& traces = fixture_traces();
    std::size_t i = 0;
    for (auto _ : state) {
        auto segs = segment_trace(traces[i++ % traces.size()], ctx.tokenizer, ctx.segmenter);
        benchmark::DoNotOptimize(segs.size());
    }
}
BENCHMARK(BM_Segment);

void BM_Propagate(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    DependencyGraph g(n);
    for (std::size_t i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1, EdgeKind::chain);
    for (std::size_t k = 0; k < 2 * n; ++k) {
        const auto a = rng() % n, b = rng() % n;
        if (a < b) g.add_edge(a, b, EdgeKind::entity_ref);
    }
    std::vector<double> base(n);
    for (auto& b : base) b = std::uniform_real_distribution<double>(0, 1)(rng);
    for (auto _ : state) {
        auto r = propagate_importance(g, base);
        benchmark::DoNotOptimize(r.scores.data());
    }
}
BENCHMARK(BM_Propagate)->Arg(16)->Arg(64)->Arg(256);

void BM_GreedySelect(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(2);
    std::vector<SelectionItem> items(n);
    for (auto& it : items) it = {std::uniform_real_distribution<double>(0, 1)(rng), 10 + rng() % 60};
    for (auto _ : state) {
        auto plan = greedy_select(items, n - 1, 256, 0.3);
        benchmark::DoNotOptimize(plan.total_importance);
    }
}
BENCHMARK(BM_GreedySelect)->Arg(16)->Arg(64);

}  // namespace
