#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cotkit/corpus.hpp"
#include "cotkit/lexicon.hpp"
#include "cotkit/tokenizer.hpp"

namespace cotkit {

/// Discourse markers that open a reasoning step. Single- and multi-word
/// entries are matched case-insensitively as whole words; numbered steps
/// ("1.", "2)", "Step 3:") are recognised separately and tagged "step".
struct MarkerTable {
    std::vector<std::string> words{"because", "since",         "therefore", "thus",
                                   "however", "so",            "hence",     "consequently",
                                   "first",   "second",        "finally"};
    std::vector<std::string> conclusion_openers{"therefore", "in conclusion", "the answer is"};
    bool numbered_steps = true;

    /// Tag of the marker the sentence opens with, or empty.
    std::string opening_marker(std::string_view sentence) const;
    /// Every marker occurrence in `text` (word markers anywhere, numbered
    /// steps at sentence starts).
    std::multiset<std::string> occurrences(std::string_view text) const;
    bool opens_conclusion(std::string_view sentence) const;
};

struct SegmentParams {
    /// A segment closes once it holds more than this many word tokens
    /// (punctuation excluded), unless the next sentence forces a break first.
    std::size_t min_segment_tokens = 24;
    MarkerTable markers;
    /// Words whose trailing period never ends a sentence (lowercase, with the dot).
    std::vector<std::string> abbreviations{"e.g.", "i.e.", "dr.", "vs.", "mr.", "mrs.",
                                           "ms.", "approx.", "fig.", "no.", "st.", "cf."};
    Lexicon lexicon;
};

/// Reads a JSON object with optional keys "markers", "conclusion_openers",
/// "numbered_steps", "min_segment_tokens" and "abbreviations" on top of the
/// defaults.
SegmentParams load_segment_params(const std::filesystem::path& path, SegmentParams base = {});

struct Sentence {
    std::size_t begin = 0;  // byte offsets into the trace text
    std::size_t end = 0;
};

struct Segment {
    std::size_t index = 0;
    std::size_t begin = 0;  // byte offsets into the trace text
    std::size_t end = 0;
    std::string text;
    std::size_t token_count = 0;
    std::vector<std::string> sentences;
    std::multiset<std::string> markers;
    std::set<std::string> entities;
    std::string opening_marker;  // marker the segment opens with, if any
    bool is_conclusion = false;
};

/// Sentence boundaries: one of . ! ? ; followed by whitespace or end of text,
/// except after protected abbreviations and bare list numbers ("1.").
std::vector<Sentence> split_sentences(std::string_view text, const SegmentParams& params);

/// Throws EmptyTraceError for empty or whitespace-only text.
std::vector<Segment> segment_trace(const ReasoningTrace& trace, const Tokenizer& tokenizer,
                                   const SegmentParams& params);
std::vector<Segment> segment_text(std::string_view text, const Tokenizer& tokenizer,
                                  const SegmentParams& params);

/// Rebuilds the source text from segments plus the original separators.
std::string reassemble(std::string_view source, const std::vector<Segment>& segments);

std::set<std::string> extract_entities(const Segment& segment, const Lexicon& lexicon);

enum class EdgeKind { entity_ref, connective, chain };

std::string_view to_string(EdgeKind kind);

struct Edge {
    std::size_t from = 0;
    std::size_t to = 0;
    EdgeKind kind = EdgeKind::entity_ref;
};

/// Forward-pointing dependency graph over segments.
class DependencyGraph {
public:
    explicit DependencyGraph(std::size_t node_count = 0);

    /// Ignores duplicates of an existing (from, to) pair. Throws
    /// ValidationError unless from < to < node_count.
    void add_edge(std::size_t from, std::size_t to, EdgeKind kind);
    /// Like add_edge but accepts any from != to; used to model cycles in tests.
    void add_edge_unchecked(std::size_t from, std::size_t to, EdgeKind kind);

    std::size_t node_count() const noexcept { return preds_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<std::size_t>& preds(std::size_t i) const { return preds_.at(i); }
    const std::vector<std::size_t>& succs(std::size_t i) const { return succs_.at(i); }
    std::size_t degree(std::size_t i) const { return preds_.at(i).size() + succs_.at(i).size(); }
    bool has_edge(std::size_t from, std::size_t to) const;
    bool weakly_connected() const;

private:
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> preds_;
    std::vector<std::vector<std::size_t>> succs_;
};

/// entity -> index of the first segment mentioning it.
std::map<std::string, std::size_t> first_mentions(const std::vector<Segment>& segments);

/// Edge (i, j) for every entity first introduced in i and mentioned again in j,
/// plus (i, i+1) when segment i+1 opens with a marker. A disconnected result
/// gets chain edges (i, i+1) everywhere they are missing.
DependencyGraph build_dependency_graph(const std::vector<Segment>& segments);

}  // namespace cotkit
