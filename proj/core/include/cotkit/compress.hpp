#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cotkit/compressed_trace.hpp"
#include "cotkit/corpus.hpp"
#include "cotkit/lexicon.hpp"
#include "cotkit/reconstructor.hpp"
#include "cotkit/scorer.hpp"
#include "cotkit/segmenter.hpp"
#include "cotkit/selector.hpp"
#include "cotkit/tokenizer.hpp"

namespace cotkit {

/// Everything the summarization pipeline needs besides the trace.
struct CompressionContext {
    Tokenizer tokenizer;
    SegmentParams segmenter;  // carries the lexicon
    ScorerParams scorer;
    ReconstructParams reconstruct;
    bool use_retention_cap = true;
    SelectionRule rule = SelectionRule::guarded;

    const Lexicon& lexicon() const noexcept { return segmenter.lexicon; }
};

/// Intermediate products of one summarization run, kept for audits.
struct SummarizationRun {
    std::vector<Segment> segments;
    DependencyGraph graph;
    ScoreVector scores;
    SelectionPlan plan;
    ConclusionSupport support;
    CompressedTrace result;
    std::vector<std::string> numeric_audit;  // digit tokens lost, expected empty
};

/// Segment, score, select and reconstruct. A trace that already fits the
/// budget passes through whole. Throws BudgetTooSmallError for budget 0.
SummarizationRun summarize_trace(const ReasoningTrace& trace, std::size_t budget,
                                 const CompressionContext& ctx);

/// Dispatches on `strategy`; truncation never throws for budget 0.
CompressedTrace compress_trace(const ReasoningTrace& trace, std::size_t budget, Strategy strategy,
                               const CompressionContext& ctx);

/// |entities in compressed text ∩ entities in trace| / |entities in trace|;
/// 1 when the trace mentions no entity.
double entity_retention(const ReasoningTrace& trace, const CompressedTrace& compressed,
                        const Lexicon& lexicon);

}  // namespace cotkit
