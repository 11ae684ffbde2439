#include "cotkit/reconstructor.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "cotkit/errors.hpp"

namespace cotkit {

std::vector<Gap> detect_gaps(std::span<const std::size_t> kept, std::size_t n) {
    std::vector<Gap> gaps;
    std::ptrdiff_t prev = -1;
    for (auto k : kept) {
        const auto idx = static_cast<std::ptrdiff_t>(k);
        if (idx - prev > 1) gaps.push_back({prev, static_cast<std::size_t>(idx - prev - 1)});
        prev = idx;
    }
    const auto end = static_cast<std::ptrdiff_t>(n);
    if (end - prev > 1) gaps.push_back({prev, static_cast<std::size_t>(end - prev - 1)});
    return gaps;
}

std::vector<Bridge> insert_bridges(std::span<const Gap> gaps, const std::vector<Segment>& segments,
                                   std::size_t threshold) {
    std::vector<Bridge> out;
    for (const auto& gap : gaps) {
        if (gap.size <= threshold) continue;
        // entity -> (segments mentioning it, first dropped index mentioning it)
        std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
        const auto first = static_cast<std::size_t>(gap.after_index + 1);
        for (std::size_t i = first; i < first + gap.size && i < segments.size(); ++i) {
            for (const auto& e : segments[i].entities) {
                auto [it, inserted] = tally.try_emplace(e, 0, i);
                ++it->second.first;
            }
        }
        const std::string* top = nullptr;
        std::pair<std::size_t, std::size_t> top_key{0, 0};
        for (const auto& [term, key] : tally) {
            if (!top || key.first > top_key.first ||
                (key.first == top_key.first && key.second < top_key.second)) {
                top = &term;
                top_key = key;
            }
        }
        out.push_back({gap.after_index, top ? "[...intermediate steps omitted; key finding: " + *top + "]"
                                            : std::string("[...]")});
    }
    return out;
}

namespace {

// At most `max_tokens` tokens of the sentence around the first mention of
// `term` inside `segment`.
std::string definition_snippet(const Segment& segment, const std::string& term, const Lexicon& lexicon,
                               const Tokenizer& tokenizer, std::size_t max_tokens) {
    std::string_view sentence = segment.text;
    std::size_t term_offset = 0;
    for (const auto& s : segment.sentences) {
        for (const auto& m : lexicon.matches(s)) {
            if (m.term == term) {
                sentence = s;
                term_offset = m.span.begin;
                goto found;
            }
        }
    }
found:
    const auto spans = tokenizer.spans(sentence);
    if (max_tokens == 0) return {};
    if (spans.size() <= max_tokens) return std::string(sentence);
    std::size_t term_token = 0;
    while (term_token + 1 < spans.size() && spans[term_token].end <= term_offset) ++term_token;
    const std::size_t lead = std::min<std::size_t>(4, (max_tokens - 1) / 2);
    std::size_t start = term_token >= lead ? term_token - lead : 0;
    if (start + max_tokens > spans.size()) start = spans.size() - max_tokens;
    const std::size_t stop = start + max_tokens;
    auto is_punct = [&](std::size_t i) {
        return spans[i].end - spans[i].begin == 1 && std::ispunct(static_cast<unsigned char>(sentence[spans[i].begin]));
    };
    while (start < term_token && is_punct(start)) ++start;
    return std::string(sentence.substr(spans[start].begin, spans[stop - 1].end - spans[start].begin));
}

}  // namespace

EntityConsistency enforce_entity_consistency(std::span<const std::size_t> kept,
                                             const std::vector<Segment>& segments,
                                             const std::map<std::string, std::size_t>& registry,
                                             const Lexicon& lexicon, const Tokenizer& tokenizer,
                                             std::size_t max_tokens) {
    EntityConsistency out;
    const std::set<std::size_t> kept_set(kept.begin(), kept.end());
    std::set<std::string> handled;
    for (auto k : kept) {
        for (const auto& e : segments.at(k).entities) {
            if (!handled.insert(e).second) continue;
            auto it = registry.find(e);
            if (it == registry.end()) {
                out.undefined.push_back(e);
                continue;
            }
            if (kept_set.contains(it->second)) continue;
            out.notes.push_back({e, definition_snippet(segments.at(it->second), e, lexicon, tokenizer, max_tokens),
                                 k});
        }
    }
    return out;
}

std::string support_statement(const Segment& predecessor) {
    if (predecessor.entities.empty()) return "Supported by: earlier reasoning steps.";
    std::string s = "Supported by: ";
    bool first = true;
    for (const auto& e : predecessor.entities) {
        if (!first) s += ", ";
        s += e;
        first = false;
    }
    return s + ".";
}

namespace {

std::size_t conclusion_of(const std::vector<Segment>& segments) {
    for (std::size_t i = 0; i < segments.size(); ++i)
        if (segments[i].is_conclusion) return i;
    return segments.size() - 1;
}

bool has_kept_predecessor(const DependencyGraph& graph, std::size_t node,
                          const std::vector<std::size_t>& kept) {
    const auto& preds = graph.preds(node);
    return std::any_of(preds.begin(), preds.end(),
                       [&](std::size_t p) { return std::binary_search(kept.begin(), kept.end(), p); });
}

}  // namespace

ConclusionSupport ensure_conclusion(const SelectionPlan& plan, const std::vector<Segment>& segments,
                                    const DependencyGraph& graph, const ScoreVector& scores,
                                    std::size_t budget) {
    ConclusionSupport out{plan, std::nullopt, {}};
    const auto c = conclusion_of(segments);
    const auto& preds = graph.preds(c);
    if (preds.empty()) return out;
    std::size_t best = preds.front();
    for (auto p : preds) {
        if (scores[p].normalized > scores[best].normalized ||
            (scores[p].normalized == scores[best].normalized && p > best))
            best = p;
    }
    out.best_predecessor = best;
    if (has_kept_predecessor(graph, c, plan.kept)) return out;

    if (!plan.conclusion_prefix_tokens && plan.total_tokens + segments[best].token_count <= budget) {
        auto& p = out.plan;
        p.kept.insert(std::upper_bound(p.kept.begin(), p.kept.end(), best), best);
        p.total_tokens += segments[best].token_count;
        p.total_importance += scores[best].normalized;
    } else {
        out.statement = support_statement(segments[best]);
    }
    return out;
}

CompressedTrace assemble(const ConclusionSupport& support, const std::vector<Segment>& segments,
                         const DependencyGraph& graph, const ScoreVector& scores,
                         const Lexicon& lexicon, const Tokenizer& tokenizer, std::size_t budget,
                         const ReconstructParams& params) {
    if (budget == 0) throw BudgetTooSmallError("cannot assemble a trace into a zero-token budget");
    const auto c = conclusion_of(segments);
    const auto registry = first_mentions(segments);

    std::vector<std::size_t> kept = support.plan.kept;
    std::optional<std::size_t> conclusion_prefix = support.plan.conclusion_prefix_tokens;
    bool allow_statement = true, allow_notes = true, allow_bridges = true;

    CompressedTrace out;
    out.strategy = Strategy::summarization;
    out.budget = budget;
    for (std::size_t round = 0;; ++round) {
        const auto gaps = detect_gaps(kept, segments.size());
        const auto bridges = allow_bridges ? insert_bridges(gaps, segments, params.gap_threshold)
                                           : std::vector<Bridge>{};
        auto consistency = enforce_entity_consistency(kept, segments, registry, lexicon, tokenizer,
                                                      params.note_max_tokens);
        if (!allow_notes) consistency.notes.clear();
        const bool show_statement = allow_statement && !support.statement.empty() &&
                                    !has_kept_predecessor(graph, c, kept);

        std::vector<std::string> pieces;
        std::ptrdiff_t prev = -1;
        auto emit_bridge_after = [&](std::ptrdiff_t after) {
            for (const auto& b : bridges)
                if (b.after_index == after) pieces.push_back(b.text);
        };
        for (auto k : kept) {
            emit_bridge_after(prev);
            for (const auto& note : consistency.notes)
                if (note.first_use == k) pieces.push_back("[" + note.term + ": " + note.definition + "]");
            if (k == c && show_statement) pieces.push_back(support.statement);
            if (k == c && conclusion_prefix) pieces.push_back(tokenizer.prefix(segments[k].text, *conclusion_prefix));
            else pieces.push_back(segments[k].text);
            prev = static_cast<std::ptrdiff_t>(k);
        }
        emit_bridge_after(prev);

        std::string text;
        for (const auto& p : pieces) {
            if (p.empty()) continue;
            if (!text.empty()) text += ' ';
            text += p;
        }
        const auto tokens = tokenizer.count(text);
        if (tokens <= budget) {
            out.text = std::move(text);
            out.token_count = tokens;
            out.kept_indices = kept;
            out.bridges = bridges;
            out.entity_notes = std::move(consistency.notes);
            out.support_statement = show_statement ? support.statement : std::string{};
            out.conclusion_truncated = conclusion_prefix.has_value();
            out.fits_budget = true;
            out.eviction_rounds = round;
            return out;
        }

        // Evict the weakest non-conclusion segment (ties: more tokens, then later).
        std::optional<std::size_t> victim;
        for (auto k : kept) {
            if (k == c) continue;
            if (!victim) {
                victim = k;
                continue;
            }
            const double a = scores[k].normalized, b = scores[*victim].normalized;
            if (a < b || (a == b && (segments[k].token_count > segments[*victim].token_count ||
                                     (segments[k].token_count == segments[*victim].token_count && k > *victim))))
                victim = k;
        }
        if (victim) {
            kept.erase(std::find(kept.begin(), kept.end(), *victim));
            continue;
        }
        // Only the conclusion is left: one last round without optional
        // material, cut to a prefix if the bare conclusion still overflows.
        const bool had_optional = show_statement || !consistency.notes.empty() || !bridges.empty();
        allow_statement = allow_notes = allow_bridges = false;
        const bool overflows = tokenizer.count(segments[c].text) > budget;
        if (overflows && !conclusion_prefix) conclusion_prefix = budget;
        else if (!had_optional) throw BudgetTooSmallError("conclusion prefix cannot fit the budget");
    }
}

std::vector<std::string> audit_numeric_tokens(const CompressedTrace& out,
                                              const std::vector<Segment>& segments) {
    static const Tokenizer approx = Tokenizer::approximate();
    std::vector<std::string> missing;
    const auto out_spans = approx.spans(out.text);
    std::multiset<std::string> available;
    for (const auto& s : out_spans) available.insert(out.text.substr(s.begin, s.size()));
    for (auto k : out.kept_indices) {
        const auto& seg = segments.at(k);
        if (seg.is_conclusion && out.conclusion_truncated) continue;
        for (const auto& s : approx.spans(seg.text)) {
            auto tok = seg.text.substr(s.begin, s.size());
            if (std::none_of(tok.begin(), tok.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
                continue;
            auto it = available.find(tok);
            if (it == available.end()) missing.push_back(tok);
            else available.erase(it);
        }
    }
    return missing;
}

}  // namespace cotkit
