#include "cotkit/compress.hpp"

#include <json.hpp>

#include "cotkit/errors.hpp"

namespace cotkit {

using nlohmann::json;

std::string_view to_string(Strategy s) {
    return s == Strategy::summarization ? "summarization" : "truncation";
}

Strategy parse_strategy(std::string_view s) {
    if (s == "summarization" || s == "summarize" || s == "summary") return Strategy::summarization;
    if (s == "truncation" || s == "truncate") return Strategy::truncation;
    throw ValidationError("unknown compression strategy \"" + std::string(s) + "\"");
}

std::string to_json_line(const CompressedTrace& c) {
    auto bridges = json::array();
    for (const auto& b : c.bridges) bridges.push_back({{"after_index", b.after_index}, {"text", b.text}});
    auto notes = json::array();
    for (const auto& n : c.entity_notes)
        notes.push_back({{"term", n.term}, {"definition", n.definition}, {"first_use", n.first_use}});
    json j{{"schema_version", 1},
           {"question_id", c.question_id},
           {"source_trace", c.source_trace_id},
           {"strategy", std::string(to_string(c.strategy))},
           {"budget", c.budget},
           {"text", c.text},
           {"token_count", c.token_count},
           {"kept_indices", c.kept_indices},
           {"bridges", bridges},
           {"entity_notes", notes},
           {"eviction_rounds", c.eviction_rounds},
           {"fits_budget", c.fits_budget},
           {"degenerate", c.degenerate}};
    if (!c.support_statement.empty()) j["support_statement"] = c.support_statement;
    if (c.conclusion_truncated) j["conclusion_truncated"] = true;
    return j.dump();
}

CompressedTrace compressed_from_json_line(std::string_view line) {
    try {
        const auto j = json::parse(line);
        CompressedTrace c;
        c.question_id = j.at("question_id").get<std::string>();
        c.source_trace_id = j.value("source_trace", std::string{});
        c.strategy = parse_strategy(j.at("strategy").get<std::string>());
        c.budget = j.at("budget").get<std::size_t>();
        c.text = j.at("text").get<std::string>();
        c.token_count = j.at("token_count").get<std::size_t>();
        c.kept_indices = j.at("kept_indices").get<std::vector<std::size_t>>();
        for (const auto& b : j.at("bridges"))
            c.bridges.push_back({b.at("after_index").get<std::ptrdiff_t>(), b.at("text").get<std::string>()});
        for (const auto& n : j.at("entity_notes"))
            c.entity_notes.push_back({n.at("term").get<std::string>(), n.at("definition").get<std::string>(),
                                      n.value("first_use", std::size_t{0})});
        c.fits_budget = j.value("fits_budget", true);
        c.degenerate = j.value("degenerate", false);
        c.support_statement = j.value("support_statement", std::string{});
        c.conclusion_truncated = j.value("conclusion_truncated", false);
        c.eviction_rounds = j.value("eviction_rounds", std::size_t{0});
        return c;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid compressed record: ") + e.what());
    }
}

SummarizationRun summarize_trace(const ReasoningTrace& trace, std::size_t budget,
                                 const CompressionContext& ctx) {
    if (budget == 0) throw BudgetTooSmallError("summarization needs a budget of at least 1 token");
    SummarizationRun run;
    run.segments = segment_trace(trace, ctx.tokenizer, ctx.segmenter);
    run.graph = build_dependency_graph(run.segments);
    run.scores = score_segments(run.segments, run.graph, ctx.lexicon(), ctx.tokenizer, ctx.scorer);

    const double cap = ctx.use_retention_cap ? retention_cap(budget) : 1.0;
    if (trace.token_count <= budget) {
        SelectionPlan all;
        all.budget = budget;
        all.cap_fraction = 1.0;
        all.max_kept = run.segments.size();
        for (std::size_t i = 0; i < run.segments.size(); ++i) {
            all.kept.push_back(i);
            all.total_tokens += run.segments[i].token_count;
            all.total_importance += run.scores[i].normalized;
        }
        run.plan = all;
    } else {
        run.plan = greedy_select(run.segments, run.scores, budget, cap, ctx.rule);
    }
    run.support = ensure_conclusion(run.plan, run.segments, run.graph, run.scores, budget);
    run.result = assemble(run.support, run.segments, run.graph, run.scores, ctx.lexicon(), ctx.tokenizer,
                          budget, ctx.reconstruct);
    run.result.question_id = trace.question_id;
    run.result.source_trace_id = trace.id();
    run.numeric_audit = audit_numeric_tokens(run.result, run.segments);
    return run;
}

CompressedTrace compress_trace(const ReasoningTrace& trace, std::size_t budget, Strategy strategy,
                               const CompressionContext& ctx) {
    if (strategy == Strategy::truncation) return truncate_baseline(trace, ctx.tokenizer, budget);
    return summarize_trace(trace, budget, ctx).result;
}

double entity_retention(const ReasoningTrace& trace, const CompressedTrace& compressed,
                        const Lexicon& lexicon) {
    const auto original = extract_entities(trace.text, lexicon);
    if (original.empty()) return 1.0;
    const auto kept = extract_entities(compressed.text, lexicon);
    std::size_t shared = 0;
    for (const auto& e : kept) shared += original.count(e);
    return static_cast<double>(shared) / static_cast<double>(original.size());
}

}  // namespace cotkit
