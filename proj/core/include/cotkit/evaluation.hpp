#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cotkit/analyzer.hpp"
#include "cotkit/chat_client.hpp"
#include "cotkit/compress.hpp"
#include "cotkit/corpus.hpp"
#include "cotkit/response_cache.hpp"

namespace cotkit {

inline constexpr const char* kAnswerInstruction = "Answer with a single letter A–E.";

/// Stem, lettered options, an optional "Reasoning:" block, then the fixed
/// instruction. An empty reasoning drops the block.
std::string build_answer_prompt(const Question& q, const std::string& reasoning);
std::string build_thinking_prompt(const Question& q);

/// First uppercase A-E with no letter or digit on either side.
std::optional<char> parse_answer_letter(const std::string& reply);

struct AnswerOutcome {
    std::optional<char> predicted;
    bool correct = false;
    std::size_t prompt_tokens = 0;
    bool from_cache = false;
};

/// Throws TransportError/RemoteError when no reply could be obtained.
AnswerOutcome answer_and_score(const Question& q, const std::string& reasoning, const std::string& answering_model,
                               ChatClient& client, ResponseCache& cache);

/// Asks `summarizer_model` to tighten a deterministic compression. Keeps the
/// deterministic result when the reply is empty or over budget.
CompressedTrace refine_compression(const ReasoningTrace& trace, const CompressedTrace& compressed,
                                   const std::string& summarizer_model, ChatClient& client, ResponseCache& cache,
                                   const Tokenizer& tokenizer);

/// Declarative description of one evaluation run. Paths are resolved
/// against the manifest's directory.
struct RunManifest {
    std::filesystem::path questions;
    std::optional<std::filesystem::path> traces;
    std::optional<std::filesystem::path> models;
    std::optional<std::filesystem::path> lexicon;
    std::optional<std::filesystem::path> segmenter;
    std::vector<std::string> thinking;
    std::vector<std::string> answering;
    std::vector<std::size_t> budgets;
    std::vector<Strategy> strategies{Strategy::summarization, Strategy::truncation};
    std::uint64_t seed = 0;
    std::string endpoint;
    std::size_t concurrency = 4;
    std::filesystem::path output_dir = "out";
    std::filesystem::path cache = "out/cache.jsonl";
    double completeness_threshold = 0.95;
    bool record_latency = false;

    void validate() const;
};

RunManifest load_manifest(const std::filesystem::path& path);
RunManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir);

struct RunResult {
    std::vector<EvalRecord> records;        // config order, then specialty name
    std::vector<CompressedTrace> compressed;  // question, thinking, budget, strategy order
    std::size_t answer_requests = 0;
    std::size_t cache_hits = 0;
    std::size_t failures = 0;
};

/// Evaluates every thinking x answering x budget x strategy config on the
/// manifest's questions.
RunResult run_matrix(const RunManifest& manifest, ChatClient& client, ResponseCache& cache);

}  // namespace cotkit
