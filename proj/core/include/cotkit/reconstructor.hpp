#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cotkit/compressed_trace.hpp"
#include "cotkit/lexicon.hpp"
#include "cotkit/scorer.hpp"
#include "cotkit/segmenter.hpp"
#include "cotkit/selector.hpp"
#include "cotkit/tokenizer.hpp"

namespace cotkit {

struct Gap {
    std::ptrdiff_t after_index = -1;  // last kept index before the run, -1 if leading
    std::size_t size = 0;             // dropped segments in the run

    friend bool operator==(const Gap&, const Gap&) = default;
};

struct ReconstructParams {
    /// Runs of more than this many dropped segments get a bridge.
    std::size_t gap_threshold = 1;
    std::size_t note_max_tokens = 12;
};

/// One entry per maximal run of dropped segments. `kept` must be ascending.
std::vector<Gap> detect_gaps(std::span<const std::size_t> kept, std::size_t n);

/// Template bridge for every gap larger than `threshold`:
/// "[...intermediate steps omitted; key finding: <term>]" naming the entity
/// mentioned by most dropped segments in the run, or "[...]" when none is.
std::vector<Bridge> insert_bridges(std::span<const Gap> gaps, const std::vector<Segment>& segments,
                                   std::size_t threshold = 1);

struct EntityConsistency {
    std::vector<EntityNote> notes;
    std::vector<std::string> undefined;  // used but absent from the registry (audit)
};

/// Every entity used by a kept segment whose first mention was dropped gets
/// one note holding at most `max_tokens` tokens of the defining sentence.
EntityConsistency enforce_entity_consistency(std::span<const std::size_t> kept,
                                             const std::vector<Segment>& segments,
                                             const std::map<std::string, std::size_t>& registry,
                                             const Lexicon& lexicon, const Tokenizer& tokenizer,
                                             std::size_t max_tokens = 12);

struct ConclusionSupport {
    SelectionPlan plan;
    /// Predecessor of the conclusion with the highest score, if any.
    std::optional<std::size_t> best_predecessor;
    /// "Supported by: ..." line, set when no predecessor could be kept.
    std::string statement;
};

/// Keeps the conclusion backed by at least one kept predecessor: adds the
/// best-scoring predecessor when it fits the budget (even past the kept-count
/// cap), otherwise emits a one-line summary of that predecessor's entities.
ConclusionSupport ensure_conclusion(const SelectionPlan& plan, const std::vector<Segment>& segments,
                                    const DependencyGraph& graph, const ScoreVector& scores,
                                    std::size_t budget);

std::string support_statement(const Segment& predecessor);

/// Renders kept segments in original order with bridges, entity notes and
/// the support statement. While the text overflows the budget the
/// lowest-scoring non-conclusion segment is evicted and bridging redone;
/// once only the conclusion is left, optional material is dropped and
/// finally the conclusion is cut to a token prefix.
/// Throws BudgetTooSmallError when budget is 0.
CompressedTrace assemble(const ConclusionSupport& support, const std::vector<Segment>& segments,
                         const DependencyGraph& graph, const ScoreVector& scores,
                         const Lexicon& lexicon, const Tokenizer& tokenizer, std::size_t budget,
                         const ReconstructParams& params = {});

/// Digit-bearing tokens of fully kept segments that are missing from the
/// output text. Empty on success.
std::vector<std::string> audit_numeric_tokens(const CompressedTrace& out,
                                              const std::vector<Segment>& segments);

}  // namespace cotkit
