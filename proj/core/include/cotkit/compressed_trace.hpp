#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cotkit {

enum class Strategy { summarization, truncation };

std::string_view to_string(Strategy s);
/// Accepts "summarization"/"summarize" and "truncation"/"truncate".
Strategy parse_strategy(std::string_view s);

/// Placeholder for a run of dropped segments; it follows original segment
/// `after_index` (-1 for a leading run).
struct Bridge {
    std::ptrdiff_t after_index = -1;
    std::string text;
};

/// Definition carried over from a dropped segment, printed just before
/// `first_use`, the first kept segment mentioning the term.
struct EntityNote {
    std::string term;
    std::string definition;
    std::size_t first_use = 0;
};

/// A reasoning trace rewritten to fit a token budget.
struct CompressedTrace {
    std::string question_id;
    std::string source_trace_id;
    Strategy strategy = Strategy::summarization;
    std::size_t budget = 0;
    std::string text;
    std::size_t token_count = 0;
    std::vector<std::size_t> kept_indices;  // strictly increasing
    std::vector<Bridge> bridges;
    std::vector<EntityNote> entity_notes;
    std::string support_statement;  // set when the conclusion lost all support
    bool fits_budget = true;
    bool degenerate = false;  // nothing survived (budget 0)
    bool conclusion_truncated = false;
    std::size_t eviction_rounds = 0;
};

/// compressed.jsonl record (schema_version 1).
std::string to_json_line(const CompressedTrace& c);
CompressedTrace compressed_from_json_line(std::string_view line);

}  // namespace cotkit
