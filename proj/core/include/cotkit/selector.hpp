#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cotkit/compressed_trace.hpp"
#include "cotkit/corpus.hpp"
#include "cotkit/scorer.hpp"
#include "cotkit/segmenter.hpp"
#include "cotkit/tokenizer.hpp"

namespace cotkit {

/// Fraction of segments a budget may keep: 0.05, 0.15, 0.30, 0.50 and 0.75
/// at 64, 128, 256, 512 and 1024 tokens, linear in log2(budget) in between,
/// 0.05 below 64 and 1.0 above 1024.
double retention_cap(std::size_t budget);

/// ceil(cap * n), at least 1.
std::size_t max_kept_count(double cap, std::size_t n);

enum class SelectionRule {
    /// Plain density order (importance per token); the literal greedy.
    density,
    /// Best of density order, importance order and best-single-then-density,
    /// made monotone in the budget. Keeps the half-of-optimum guarantee that
    /// plain density order lacks.
    guarded,
};

struct SelectionItem {
    double importance = 0.0;
    std::size_t tokens = 0;
};

struct SelectionPlan {
    std::vector<std::size_t> kept;  // ascending
    std::size_t total_tokens = 0;
    double total_importance = 0.0;
    std::size_t budget = 0;
    double cap_fraction = 1.0;
    std::size_t max_kept = 0;
    /// Set when the conclusion alone overflows the budget and only its first
    /// `*conclusion_prefix_tokens` tokens are kept.
    std::optional<std::size_t> conclusion_prefix_tokens;

    bool contains(std::size_t i) const;
};

/// Seeds the conclusion, then fills the remaining budget and kept-count cap.
/// Throws BudgetTooSmallError when budget is 0.
SelectionPlan greedy_select(std::span<const SelectionItem> items, std::size_t conclusion_index,
                            std::size_t budget, double cap,
                            SelectionRule rule = SelectionRule::guarded);

SelectionPlan greedy_select(const std::vector<Segment>& segments, const ScoreVector& scores,
                            std::size_t budget, double cap,
                            SelectionRule rule = SelectionRule::guarded);

/// First `budget` tokens of the trace. Budget 0 yields an empty, degenerate result.
CompressedTrace truncate_baseline(const ReasoningTrace& trace, const Tokenizer& tokenizer,
                                  std::size_t budget);

std::string plan_to_json(const SelectionPlan& plan);

}  // namespace cotkit
